#pragma once

namespace copa {

// Exit codes: 0 success, 2 usage/config error, 1 runtime failure.
int dispatch(int argc, const char* const* argv);

}  // namespace copa
