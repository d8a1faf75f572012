#include "copa/ingest.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

#include "copa/csv.hpp"
#include "copa/rng.hpp"

namespace copa {

IngestResult ingest_bid_log(const std::string& csv_path, int coalition_size,
                            uint64_t seed) {
  const CsvTable table = read_csv(csv_path);
  const int bid_col = table.column("bidding_price");
  const int pay_col = table.column("paying_price");
  const int adv_col = table.column("advertiser_id");
  if (bid_col < 0 || adv_col < 0)
    throw std::invalid_argument(
        "ingest: log needs bidding_price and advertiser_id columns");

  std::map<std::string, std::vector<double>> by_advertiser;
  IngestResult out;
  for (const auto& row : table.rows) {
    if (int(row.size()) <= std::max({bid_col, pay_col, adv_col})) {
      ++out.records_skipped;
      continue;
    }
    double bid, pay = 0.0;
    try {
      bid = std::stod(row[bid_col]);
      if (pay_col >= 0 && !row[pay_col].empty()) pay = std::stod(row[pay_col]);
    } catch (...) {
      ++out.records_skipped;
      continue;
    }
    if (!(bid >= 0.0) || !(pay >= 0.0) || row[adv_col].empty()) {
      ++out.records_skipped;
      continue;
    }
    by_advertiser[row[adv_col]].push_back(bid);
    ++out.records_used;
  }
  if (by_advertiser.empty()) throw std::invalid_argument("ingest: no usable records");

  const int advertisers = int(by_advertiser.size());
  if (coalition_size < 1 || coalition_size % advertisers != 0)
    throw std::invalid_argument(
        "ingest: coalition size must be a positive multiple of the advertiser "
        "count (" +
        std::to_string(advertisers) + ")");
  const int parts = coalition_size / advertisers;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& [id, prices] : by_advertiser)
    for (double p : prices) {
      lo = std::min(lo, p);
      hi = std::max(hi, p);
    }
  out.price_lo = lo;
  out.price_hi = hi;
  const double span = hi > lo ? hi - lo : 1.0;

  // Deterministic split: advertisers in sorted id order, a seeded
  // Fisher-Yates shuffle per advertiser, then equal contiguous chunks
  // (remainders spread over the leading chunks).
  uint32_t advertiser_index = 0;
  for (auto& [id, prices] : by_advertiser) {
    RngStream rng(seed, {0, 0, advertiser_index, 0});
    for (size_t i = prices.size(); i > 1; --i) {
      const size_t j = size_t(rng.next_unit() * double(i));
      std::swap(prices[i - 1], prices[std::min(j, i - 1)]);
    }
    const size_t n = prices.size();
    if (n < size_t(parts))
      throw std::invalid_argument("ingest: advertiser " + id +
                                  " has fewer records than requested parts");
    size_t begin = 0;
    for (int part = 0; part < parts; ++part) {
      const size_t len = n / parts + (size_t(part) < n % parts ? 1 : 0);
      std::vector<double> scaled(prices.begin() + begin,
                                 prices.begin() + begin + len);
      for (double& x : scaled) x = (x - lo) / span;
      out.value_dists.push_back(Distribution::empirical(std::move(scaled)));
      begin += len;
    }
    ++advertiser_index;
  }
  return out;
}

}  // namespace copa
