#include "earnvol/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include "earnvol/errors.hpp"
#include "earnvol/parallel.hpp"
#include "json.hpp"

namespace earnvol {

EmbeddingSet parse_embeddings(std::istream& in, std::string source) {
  EmbeddingSet set;
  set.source = std::move(source);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = "line " + std::to_string(line_no);
    std::string id;
    std::vector<double> vec;
    try {
      const auto j = nlohmann::json::parse(line);
      id = j.at("event_id").get<std::string>();
      vec = j.at("vector").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Parse, "malformed embedding at " + where + ": " + e.what());
    }
    if (vec.empty()) throw Error(ErrorKind::RaggedDimension, "empty vector at " + where);
    if (set.dim == 0) set.dim = vec.size();
    if (vec.size() != set.dim)
      throw Error(ErrorKind::RaggedDimension, "dimension " + std::to_string(vec.size()) + " at " + where +
                                                  ", expected " + std::to_string(set.dim));
    double norm2 = 0.0;
    for (double v : vec) {
      if (!std::isfinite(v)) throw Error(ErrorKind::Parse, "non-finite entry at " + where);
      norm2 += v * v;
    }
    if (!(std::sqrt(norm2) > 1e-12)) throw Error(ErrorKind::InvalidArgument, "zero vector at " + where);
    if (!set.vectors.emplace(id, std::move(vec)).second)
      throw Error(ErrorKind::InvalidArgument, "duplicate event_id '" + id + "' at " + where);
  }
  if (set.vectors.empty()) throw Error(ErrorKind::EmptyInput, "embedding file has no rows");
  return set;
}

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open embedding file " + path.string());
  return parse_embeddings(in, path.stem().string());
}

void write_embeddings(std::ostream& out, const EmbeddingSet& set) {
  for (const auto& [id, vec] : set.vectors) out << nlohmann::json{{"event_id", id}, {"vector", vec}}.dump() << '\n';
}

RandomMode parse_random_mode(std::string_view text) {
  if (text == "all") return RandomMode::All;
  if (text == "ticker") return RandomMode::Ticker;
  throw Error(ErrorKind::Parse, "unknown random embedding mode '" + std::string(text) + "', expected all or ticker");
}

EmbeddingSet random_embeddings(std::span<const EarningsEvent> events, RandomMode mode, std::size_t dim,
                               std::uint64_t seed) {
  if (dim < 2) throw Error(ErrorKind::InvalidArgument, "random embeddings need dim >= 2");
  EmbeddingSet set;
  set.dim = dim;
  set.source = mode == RandomMode::All ? "Random(All)" : "Random(Ticker)";
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&] {
    std::vector<double> v(dim);
    for (auto& x : v) x = normal(rng);
    return v;
  };
  // Draw in sorted order so the result does not depend on input order.
  if (mode == RandomMode::Ticker) {
    std::map<std::string, std::vector<double>> per_ticker;
    for (const auto& e : events) per_ticker.emplace(e.ticker, std::vector<double>{});
    for (auto& [t, v] : per_ticker) v = draw();
    for (const auto& e : events) set.vectors[e.event_id] = per_ticker.at(e.ticker);
  } else {
    std::set<std::string> ids;
    for (const auto& e : events) ids.insert(e.event_id);
    for (const auto& id : ids) set.vectors[id] = draw();
  }
  return set;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// dot / sqrt(|a|^2 |b|^2): for identical vectors this is exactly 1.
double cosine_from(double ab, double aa, double bb) {
  const double c = ab / std::sqrt(aa * bb);
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::RaggedDimension, "cosine of vectors with different lengths");
  const double aa = dot(a, a), bb = dot(b, b);
  if (!(aa > 0.0) || !(bb > 0.0)) throw Error(ErrorKind::InvalidArgument, "cosine of a zero vector");
  return cosine_from(dot(a, b), aa, bb);
}

GroupSimilarityReport group_cosine_similarity(const EmbeddingSet& emb, std::span<const EarningsEvent> events,
                                              bool exclude_same_ticker_from_all, unsigned threads) {
  std::vector<const EarningsEvent*> evs;
  for (const auto& e : events) evs.push_back(&e);
  std::sort(evs.begin(), evs.end(),
            [](const EarningsEvent* a, const EarningsEvent* b) { return a->event_id < b->event_id; });
  evs.erase(std::unique(evs.begin(), evs.end(),
                        [](const EarningsEvent* a, const EarningsEvent* b) { return a->event_id == b->event_id; }),
            evs.end());
  const std::size_t n = evs.size();
  if (n < 2) throw Error(ErrorKind::EmptyInput, "similarity needs at least two events");

  std::vector<const std::vector<double>*> vecs(n);
  std::vector<double> norm2(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = emb.vectors.find(evs[i]->event_id);
    if (it == emb.vectors.end()) throw Error(ErrorKind::KeyMismatch, "no embedding for " + evs[i]->event_id);
    vecs[i] = &it->second;
    norm2[i] = dot(*vecs[i], *vecs[i]);
  }

  GroupSimilarityReport rep;
  rep.source = emb.source;
  rep.all_excludes_same_ticker = exclude_same_ticker_from_all;

  std::map<std::string, std::size_t> per_ticker;
  for (const auto* e : evs) ++per_ticker[e->ticker];
  for (const auto& [t, c] : per_ticker) {
    rep.within_pairs += c * (c - 1) / 2;
    if (c == 1) ++rep.singleton_tickers;
  }
  rep.all_pairs = n * (n - 1) / 2 - (exclude_same_ticker_from_all ? rep.within_pairs : 0);

  std::vector<double> row_within(n, 0.0), row_all(n, 0.0);
  parallel_for(n, threads, [&](std::size_t i) {
    std::vector<double> w, a;
    w.reserve(n - i);
    a.reserve(n - i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double c = cosine_from(dot(*vecs[i], *vecs[j]), norm2[i], norm2[j]);
      const bool same = evs[i]->ticker == evs[j]->ticker;
      if (same) w.push_back(c);
      if (!same || !exclude_same_ticker_from_all) a.push_back(c);
    }
    row_within[i] = pairwise_sum(w.data(), w.size());
    row_all[i] = pairwise_sum(a.data(), a.size());
  });
  rep.within_ticker = rep.within_pairs ? pairwise_sum(row_within.data(), n) / static_cast<double>(rep.within_pairs)
                                       : std::numeric_limits<double>::quiet_NaN();
  rep.all_dataset = rep.all_pairs ? pairwise_sum(row_all.data(), n) / static_cast<double>(rep.all_pairs)
                                  : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::KeyMismatch, "pearson: length mismatch");
  const std::size_t n = a.size();
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "pearson needs at least 2 pairs");
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  if (constant(a) || constant(b)) throw Error(ErrorKind::DegenerateVariance, "pearson: constant input");
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double pearson(const PredictionSet& a, const PredictionSet& b, int tau) {
  std::vector<double> va, vb;
  auto keys = [tau](const PredictionSet& p) {
    std::vector<std::string> k;
    for (const auto& [id, m] : p.values)
      if (m.contains(tau)) k.push_back(id);
    return k;
  };
  const auto ka = keys(a), kb = keys(b);
  if (ka != kb)
    throw Error(ErrorKind::KeyMismatch, "prediction sets '" + a.model + "' and '" + b.model +
                                            "' cover different events for tau=" + std::to_string(tau));
  for (const auto& id : ka) {
    va.push_back(a.values.at(id).at(tau));
    vb.push_back(b.values.at(id).at(tau));
  }
  return pearson(va, vb);
}

PredictionSet run_embedding_baseline(const EventTable& table, const Split& split, std::span<const int> taus,
                                     const EmbeddingSet& emb, double ridge, std::string label) {
  std::vector<std::string> pool = split.train;
  pool.insert(pool.end(), split.val.begin(), split.val.end());
  std::sort(pool.begin(), pool.end());
  if (pool.empty() || split.test.empty()) throw Error(ErrorKind::EmptyInput, "embedding baseline: empty split");
  auto vec_of = [&](const std::string& id) -> const std::vector<double>& {
    auto it = emb.vectors.find(id);
    if (it == emb.vectors.end()) throw Error(ErrorKind::KeyMismatch, "no embedding for " + id);
    return it->second;
  };
  Matrix x(pool.size(), emb.dim);
  std::vector<std::vector<double>> ys(taus.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& v = vec_of(pool[i]);
    std::copy(v.begin(), v.end(), x.row(i).begin());
    const auto& entry = table.at(pool[i]);
    for (std::size_t t = 0; t < taus.size(); ++t) ys[t].push_back(entry.value(taus[t]));
  }
  const auto models = ridge_fit_multi(x, ys, ridge);
  PredictionSet out;
  out.model = std::move(label);
  for (const auto& id : split.test) {
    const auto& v = vec_of(id);
    for (std::size_t t = 0; t < taus.size(); ++t) out.values[id][taus[t]] = models[t].predict(v);
  }
  return out;
}

}  // namespace earnvol
