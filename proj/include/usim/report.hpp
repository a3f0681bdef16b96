#pragma once

// Text renderings of scores. Rationals print with four fraction digits next
// to their exact counts; every rendering is byte-deterministic.

#include <cmath>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "usim/corpus.hpp"
#include "usim/edit_harness.hpp"
#include "usim/measures.hpp"
#include "usim/rational.hpp"

namespace usim {

enum class ReportFormat { Tsv, JsonLines };

namespace detail {

inline double round4(double v) { return std::round(v * 1e4) / 1e4; }

inline nlohmann::ordered_json triple_json(const ScoreTriple& t) {
  nlohmann::ordered_json j;
  j["p"] = round4(to_double(t.precision));
  j["r"] = round4(to_double(t.recall));
  j["f"] = round4(to_double(t.f_score));
  j["p_matched"] = t.candidate_matched;
  j["p_total"] = t.candidate_total;
  j["r_matched"] = t.reference_matched;
  j["r_total"] = t.reference_total;
  return j;
}

inline std::string triple_tsv(const ScoreTriple& t) {
  return fmt::format("{}\t{}\t{}", to_decimal(t.precision), to_decimal(t.recall), to_decimal(t.f_score));
}

inline std::string counts_tsv(const ScoreTriple& t) {
  return fmt::format("{}/{}\t{}/{}", t.candidate_matched, t.candidate_total, t.reference_matched, t.reference_total);
}

}  // namespace detail

inline std::string score_header_tsv() {
  return "id\ts_to_c_p\ts_to_c_r\ts_to_c_f\tc_to_s_p\tc_to_s_r\tc_to_s_f\taverage"
         "\ts_to_c_p_counts\ts_to_c_r_counts\tc_to_s_p_counts\tc_to_s_r_counts\n";
}

inline std::string format_score_row(const std::string& id, const UsimReport& r, ReportFormat fmt_) {
  if (fmt_ == ReportFormat::Tsv)
    return fmt::format("{}\t{}\t{}\t{}\t{}\t{}\n", id, detail::triple_tsv(r.s_to_c), detail::triple_tsv(r.c_to_s),
                       to_decimal(r.average), detail::counts_tsv(r.s_to_c), detail::counts_tsv(r.c_to_s));
  nlohmann::ordered_json j;
  j["id"] = id;
  j["s_to_c"] = detail::triple_json(r.s_to_c);
  j["c_to_s"] = detail::triple_json(r.c_to_s);
  j["average"] = detail::round4(to_double(r.average));
  return j.dump() + "\n";
}

inline std::string format_single_score(const std::string& id, const UsimReport& r, ReportFormat f) {
  return (f == ReportFormat::Tsv ? score_header_tsv() : std::string()) + format_score_row(id, r, f);
}

// Per-pair rows, then field means over all pairs, then unpaired-id warnings.
inline std::string format_corpus_report(const std::vector<PairScore>& scores, const CorpusPairing& pairing,
                                        ReportFormat f) {
  std::string out = f == ReportFormat::Tsv ? score_header_tsv() : std::string();
  double mean[7] = {};
  for (const auto& s : scores) {
    out += format_score_row(s.id, s.report, f);
    const Rational* fields[7] = {&s.report.s_to_c.precision, &s.report.s_to_c.recall, &s.report.s_to_c.f_score,
                                 &s.report.c_to_s.precision, &s.report.c_to_s.recall, &s.report.c_to_s.f_score,
                                 &s.report.average};
    for (int k = 0; k < 7; ++k) mean[k] += to_double(*fields[k]);
  }
  const auto n = static_cast<double>(scores.size());
  if (n > 0)
    for (double& m : mean) m /= n;

  if (f == ReportFormat::Tsv) {
    out += fmt::format("mean\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t-\t-\t-\t-\n", to_decimal(mean[0]), to_decimal(mean[1]),
                       to_decimal(mean[2]), to_decimal(mean[3]), to_decimal(mean[4]), to_decimal(mean[5]),
                       to_decimal(mean[6]));
    for (const auto& id : pairing.unpaired_source) out += fmt::format("# warning\tunpaired\tsource\t{}\n", id);
    for (const auto& id : pairing.unpaired_correction) out += fmt::format("# warning\tunpaired\tcorrection\t{}\n", id);
    return out;
  }
  nlohmann::ordered_json agg;
  agg["pairs"] = scores.size();
  const char* keys[3] = {"p", "r", "f"};
  for (int k = 0; k < 3; ++k) agg["s_to_c"][keys[k]] = detail::round4(mean[k]);
  for (int k = 0; k < 3; ++k) agg["c_to_s"][keys[k]] = detail::round4(mean[3 + k]);
  agg["average"] = detail::round4(mean[6]);
  nlohmann::ordered_json line;
  line["aggregate"] = agg;
  out += line.dump() + "\n";
  const auto warn = [&](const std::vector<std::string>& ids, const char* side) {
    for (const auto& id : ids) {
      nlohmann::ordered_json w;
      w["warning"] = "unpaired";
      w["side"] = side;
      w["id"] = id;
      out += w.dump() + "\n";
    }
  };
  warn(pairing.unpaired_source, "source");
  warn(pairing.unpaired_correction, "correction");
  return out;
}

inline std::string format_distsim(const std::vector<LabelDistSim>& rows, std::size_t pairs, ReportFormat f) {
  std::string out;
  if (f == ReportFormat::Tsv) out += "group\tlabels\tdistance\tsimilarity_unofficial\tdistance_exact\tpairs\n";
  for (const auto& r : rows) {
    if (f == ReportFormat::Tsv) {
      std::string labels;
      for (const auto& l : r.group.labels) labels += (labels.empty() ? "" : ",") + l;
      out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\n", r.group.name, labels, to_decimal(r.value), to_decimal(r.similarity),
                         to_fraction(r.value), pairs);
    } else {
      nlohmann::ordered_json j;
      j["group"] = r.group.name;
      j["labels"] = r.group.labels;
      j["distance"] = detail::round4(to_double(r.value));
      j["similarity_unofficial"] = detail::round4(to_double(r.similarity));
      j["distance_exact"] = to_fraction(r.value);
      j["pairs"] = pairs;
      out += j.dump() + "\n";
    }
  }
  return out;
}

inline std::string format_deltas(const TypeDeltaReport& report, ReportFormat f) {
  std::string out;
  if (f == ReportFormat::Tsv) out += "type\tdelta_mean\toccurrences\n";
  for (const auto& t : report.types) {
    if (f == ReportFormat::Tsv) {
      out += fmt::format("{}\t{}\t{}\n", t.type, to_decimal(t.delta_mean), t.occurrences);
    } else {
      nlohmann::ordered_json j;
      j["type"] = t.type;
      j["delta_mean"] = detail::round4(t.delta_mean);
      j["occurrences"] = t.occurrences;
      out += j.dump() + "\n";
    }
  }
  return out;
}

}  // namespace usim
