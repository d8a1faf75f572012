#pragma once

#include <string>
#include <vector>

#include "copa/distributions.hpp"

namespace copa {

struct BidLogRecord {
  double bidding_price = 0.0;
  double paying_price = 0.0;
  std::string advertiser_id;
};

struct IngestResult {
  std::vector<Distribution> value_dists;  // one empirical sampler per member
  long records_used = 0;
  long records_skipped = 0;
  double price_lo = 0.0, price_hi = 0.0;  // min-max scaling applied
};

// Reads a bid log (header: bidding_price,paying_price,advertiser_id, any
// column order), min-max scales bidding prices into [0, 1], splits each
// advertiser's records into K / #advertisers random parts (seeded), and
// returns K resampling-with-replacement value distributions. Malformed rows
// are skipped and counted. K must be a multiple of the advertiser count.
IngestResult ingest_bid_log(const std::string& csv_path, int coalition_size,
                            uint64_t seed);

}  // namespace copa
