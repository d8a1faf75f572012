#include "copa/cli.hpp"

int main(int argc, char** argv) { return copa::dispatch(argc, argv); }
