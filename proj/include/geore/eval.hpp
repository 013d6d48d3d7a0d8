#pragma once

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "geore/boxes.hpp"
#include "geore/numerics.hpp"

// Ranking and constraint metrics. Query scoring is embarrassingly parallel;
// results land in index order so the reduction is deterministic under any
// thread count.

namespace geore {
namespace eval {

// Worst rank under ties by default; a constant scorer then ranks last
// instead of first.
enum class TiePolicy { Pessimistic, Optimistic };

// 1 + number of candidates scoring higher than the true one (at least as
// high under the pessimistic policy), with other known-true candidates
// removed.
inline int filtered_rank(const Vec& scores, int true_id, const std::set<int>& known_true,
                         TiePolicy ties = TiePolicy::Pessimistic) {
  if (true_id < 0 || true_id >= static_cast<int>(scores.size()))
    throw Error("filtered_rank: true candidate out of range");
  const double s = scores[static_cast<std::size_t>(true_id)];
  int higher = 0;
  for (int c = 0; c < static_cast<int>(scores.size()); ++c) {
    if (c == true_id) continue;
    if (known_true.count(c)) continue;
    const double sc = scores[static_cast<std::size_t>(c)];
    if (ties == TiePolicy::Pessimistic ? sc >= s : sc > s) ++higher;
  }
  return 1 + higher;
}

inline int raw_rank(const Vec& scores, int true_id,
                    TiePolicy ties = TiePolicy::Pessimistic) {
  return filtered_rank(scores, true_id, {}, ties);
}

inline double mrr(const std::vector<int>& ranks) {
  if (ranks.empty()) throw Error("mrr: empty input");
  double acc = 0.0;
  for (int r : ranks) acc += 1.0 / r;
  return acc / static_cast<double>(ranks.size());
}

inline double hits_at(const std::vector<int>& ranks, int k) {
  if (ranks.empty()) throw Error("hits_at: empty input");
  double acc = 0.0;
  for (int r : ranks) acc += r <= k ? 1.0 : 0.0;
  return acc / static_cast<double>(ranks.size());
}

inline double mean_rank(const std::vector<int>& ranks) {
  if (ranks.empty()) throw Error("mean_rank: empty input");
  double acc = 0.0;
  for (int r : ranks) acc += r;
  return acc / static_cast<double>(ranks.size());
}

// Rank-sum AUC, ties credited 1/2.
inline double auc(const Vec& pos_scores, const Vec& neg_scores) {
  if (pos_scores.empty() || neg_scores.empty()) throw Error("auc: empty input");
  struct Item {
    double s;
    bool pos;
  };
  std::vector<Item> all;
  all.reserve(pos_scores.size() + neg_scores.size());
  for (double s : pos_scores) all.push_back({s, true});
  for (double s : neg_scores) all.push_back({s, false});
  std::sort(all.begin(), all.end(), [](const Item& a, const Item& b) { return a.s < b.s; });
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    while (j < all.size() && all[j].s == all[i].s) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k)
      if (all[k].pos) rank_sum += avg_rank;
    i = j;
  }
  const double np = static_cast<double>(pos_scores.size());
  const double nn = static_cast<double>(neg_scores.size());
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

// Exact corner comparison: subclass box strictly within the superclass box.
inline double containment_accuracy(const std::vector<std::pair<boxes::Box, boxes::Box>>& pairs) {
  if (pairs.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& [c, d] : pairs)
    if (boxes::box_in_box(c, d)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

struct RankingSummary {
  std::size_t n = 0;
  double mr = 0.0, mrr = 0.0, hits1 = 0.0, hits3 = 0.0, hits10 = 0.0;
};

inline RankingSummary summarize(const std::vector<int>& ranks) {
  RankingSummary s;
  s.n = ranks.size();
  if (ranks.empty()) return s;
  s.mr = mean_rank(ranks);
  s.mrr = mrr(ranks);
  s.hits1 = hits_at(ranks, 1);
  s.hits3 = hits_at(ranks, 3);
  s.hits10 = hits_at(ranks, 10);
  return s;
}

inline int worker_threads() {
  if (const char* env = std::getenv("GEORE_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

// Runs fn(i) for i in [0, n) across worker threads; fn writes to slot i.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const int workers = std::min<int>(worker_threads(), static_cast<int>(n) > 0 ? static_cast<int>(n) : 1);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t i = static_cast<std::size_t>(w); i < n;
           i += static_cast<std::size_t>(workers))
        fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

inline void write_metrics_json(const std::string& path,
                               const std::map<std::string, double>& metrics) {
  nlohmann::json j(metrics);
  std::ofstream out(path);
  if (!out) throw Error("cannot write metrics: " + path);
  out << j.dump(2) << '\n';
}

inline void write_per_relation_csv(
    const std::string& path,
    const std::vector<std::pair<std::string, RankingSummary>>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write per-relation table: " + path);
  out << "relation,queries,mr,mrr,hits@1,hits@3,hits@10\n";
  char buf[256];
  for (const auto& [name, s] : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%zu,%.6f,%.6f,%.6f,%.6f,%.6f\n", name.c_str(), s.n, s.mr,
                  s.mrr, s.hits1, s.hits3, s.hits10);
    out << buf;
  }
}

}  // namespace eval
}  // namespace geore
