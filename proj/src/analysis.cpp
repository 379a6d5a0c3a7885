#include "rpw/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace rpw {

uint64_t hamming(std::span<const uint8_t> a, std::span<const uint8_t> b,
                 bool bits) {
  if (a.size() != b.size())
    throw std::invalid_argument("hamming: length mismatch");
  uint64_t n = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    uint8_t x = a[i] ^ b[i];
    n += bits ? std::popcount(x) : (x != 0);
  }
  return n;
}

Kinship kinship_matrix(const std::vector<NamedBytes>& pop,
                       std::span<const uint8_t> ancestor, bool bits) {
  Kinship k;
  k.names.reserve(pop.size());
  for (const auto& [name, bytes] : pop) {
    k.names.push_back(name);
    k.to_ancestor.push_back(hamming(bytes, ancestor, bits));
  }
  k.pairwise.assign(pop.size(), std::vector<uint64_t>(pop.size(), 0));
  for (size_t i = 0; i < pop.size(); ++i)
    for (size_t j = i + 1; j < pop.size(); ++j)
      k.pairwise[i][j] = k.pairwise[j][i] =
          hamming(pop[i].second, pop[j].second, bits);
  return k;
}

namespace {

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string kinship_csv(const Kinship& k) {
  std::string out = "name,ancestor";
  for (const auto& n : k.names) out += "," + csv_quote(n);
  out += '\n';
  for (size_t i = 0; i < k.names.size(); ++i) {
    out += csv_quote(k.names[i]);
    out += "," + std::to_string(k.to_ancestor[i]);
    for (size_t j = 0; j < k.names.size(); ++j)
      out += "," + std::to_string(k.pairwise[i][j]);
    out += '\n';
  }
  return out;
}

std::vector<SiteCount> mutation_distribution(const std::vector<NamedBytes>& pop,
                                             std::span<const uint8_t> ancestor) {
  std::vector<uint32_t> counts(ancestor.size(), 0);
  for (const auto& [name, bytes] : pop) {
    if (bytes.size() != ancestor.size())
      throw std::invalid_argument("mutation_distribution: length mismatch");
    for (size_t o = 0; o < ancestor.size(); ++o)
      if (bytes[o] != ancestor[o]) ++counts[o];
  }
  std::vector<SiteCount> sites;
  for (uint32_t o = 0; o < counts.size(); ++o)
    if (counts[o] > 0) sites.push_back({o, counts[o]});
  std::sort(sites.begin(), sites.end(), [](const SiteCount& a, const SiteCount& b) {
    if (a.files != b.files) return a.files > b.files;
    return a.offset < b.offset;
  });
  return sites;
}

std::string distribution_csv(std::span<const SiteCount> sites) {
  std::string out = "offset,files\n";
  for (const SiteCount& s : sites) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "0x%04x,%u\n", s.offset, s.files);
    out += buf;
  }
  return out;
}

Moments count_moments(std::span<const uint64_t> counts) {
  if (counts.size() < 2)
    throw std::invalid_argument("count_moments: need at least two counts");
  double mean = 0.0;
  for (uint64_t c : counts) mean += static_cast<double>(c);
  mean /= static_cast<double>(counts.size());
  double ss = 0.0;
  for (uint64_t c : counts) {
    double d = static_cast<double>(c) - mean;
    ss += d * d;
  }
  return {mean, std::sqrt(ss / static_cast<double>(counts.size() - 1))};
}

double region_density(uint64_t sites, uint64_t region_size) {
  if (region_size == 0) throw std::invalid_argument("region_density: empty region");
  return static_cast<double>(sites) / static_cast<double>(region_size);
}

double region_robustness(double density, double padding_density) {
  if (padding_density == 0.0)
    throw std::invalid_argument("region_robustness: zero baseline");
  return density / padding_density;
}

uint64_t sites_in_interval(std::span<const SiteCount> sites, uint32_t begin,
                           uint32_t end, uint32_t min_files) {
  uint64_t n = 0;
  for (const SiteCount& s : sites)
    if (s.offset >= begin && s.offset < end && s.files > min_files) ++n;
  return n;
}

}  // namespace rpw
