#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "usim/error.hpp"
#include "usim/graph.hpp"
#include "usim/measures.hpp"

namespace usim {

struct CorpusPairing {
  // (index into sources, index into corrections), ordered by graph id.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::string> unpaired_source;
  std::vector<std::string> unpaired_correction;
};

inline CorpusPairing pair_corpora(const std::vector<SemanticGraph>& sources,
                                  const std::vector<SemanticGraph>& corrections) {
  const auto index = [](const std::vector<SemanticGraph>& side, const char* name) {
    std::map<std::string, std::size_t> out;
    for (std::size_t i = 0; i < side.size(); ++i)
      if (!out.emplace(side[i].id(), i).second)
        throw PairingError(fmt::format("duplicate id '{}' in {} corpus", side[i].id(), name));
    return out;
  };
  const auto s = index(sources, "source");
  const auto c = index(corrections, "correction");
  CorpusPairing out;
  for (const auto& [id, i] : s) {
    auto it = c.find(id);
    if (it == c.end())
      out.unpaired_source.push_back(id);
    else
      out.pairs.emplace_back(i, it->second);
  }
  for (const auto& [id, j] : c)
    if (!s.count(id)) out.unpaired_correction.push_back(id);
  return out;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Each index is handled
// exactly once; the first exception is rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  const unsigned count = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
  workers.reserve(count);
  for (unsigned w = 0; w < count; ++w)
    workers.emplace_back([&] {
      for (std::size_t i; !failed && (i = next++) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

struct PairScore {
  std::string id;
  UsimReport report;
};

inline std::vector<PairScore> score_corpus(const std::vector<SemanticGraph>& sources,
                                           const std::vector<SemanticGraph>& corrections,
                                           const CorpusPairing& pairing, const ScoringOptions& opts = {},
                                           unsigned jobs = 1) {
  if (pairing.pairs.empty()) throw PairingError("no graph ids are shared by the two corpora");
  std::vector<PairScore> out(pairing.pairs.size());
  parallel_for(pairing.pairs.size(), jobs, [&](std::size_t k) {
    const auto& [i, j] = pairing.pairs[k];
    out[k] = PairScore{sources[i].id(), usim(sources[i], corrections[j], opts)};
  });
  return out;
}

}  // namespace usim
