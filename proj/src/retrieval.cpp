#include "idic/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <json.hpp>

#include "idic/errors.hpp"
#include "idic/rng.hpp"

namespace idic {
namespace {

// {d} is replaced by the domain, {v} by the value.
const std::map<std::string, std::string, std::less<>>& phrase_table() {
  static const std::map<std::string, std::string, std::less<>> table = {
      {"area", "a {d} in the {v} area"},
      {"arriveby", "a {d} arriving by {v}"},
      {"book_day", "a {d} booking on {v}"},
      {"book_people", "a {d} booking for {v} people"},
      {"book_stay", "a {d} booking for {v} nights"},
      {"book_time", "a {d} booking at {v}"},
      {"day", "a {d} on {v}"},
      {"department", "a {d} with a {v} department"},
      {"departure", "a {d} from {v}"},
      {"destination", "a {d} to {v}"},
      {"food", "a {d} serving {v} food"},
      {"leaveat", "a {d} leaving at {v}"},
      {"name", "the {d} called {v}"},
      {"pricerange", "a {d} in the {v} price range"},
      {"stars", "a {d} with {v} stars"},
      {"type", "a {d} of type {v}"},
  };
  return table;
}

std::string fill_template(std::string_view tmpl, const std::string& domain, const std::string& value) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl.compare(i, 3, "{d}") == 0) {
      out += domain;
      i += 2;
    } else if (tmpl.compare(i, 3, "{v}") == 0) {
      out += value;
      i += 2;
    } else {
      out.push_back(tmpl[i]);
    }
  }
  return out;
}

std::vector<ScoredExample> top_k(std::span<const RetrievalExample> pool,
                                 const std::vector<double>& scores, std::size_t k,
                                 const std::optional<ExampleSource>& exclude) {
  std::vector<std::size_t> candidates;
  candidates.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (exclude && pool[i].source == *exclude) continue;
    candidates.push_back(i);
  }
  auto before = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return pool[a].source < pool[b].source;
  };
  const std::size_t n = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n),
                    candidates.end(), before);
  std::vector<ScoredExample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back({pool[candidates[i]], scores[candidates[i]]});
  return out;
}

}  // namespace

MaskedDialogueInformation mask(const AugmentedDialogueInformation& aug) {
  MaskedDialogueInformation out;
  out.turn_index = aug.base.turn_index;
  out.active_domains = aug.base.active_domains;
  if (aug.intent) out.intent = *aug.intent;
  out.rewritten_user =
      out.intent.empty() ? aug.base.user_utterance : rewrite_user_input(out.intent);
  return out;
}

std::string serialize_masked(const MaskedDialogueInformation& masked) {
  std::string out = "[CONTEXT] " + render_slot_braces(masked.intent.slot_values.pairs());
  out += " [SYS]  [USER] " + masked.rewritten_user;
  out += " [DOMAIN]";
  for (std::size_t i = 0; i < masked.active_domains.size(); ++i) {
    out += (i == 0 ? " " : ", ") + masked.active_domains[i];
  }
  return out;
}

std::string rewrite_user_input(const Intent& intent) {
  std::string out = "I want ";
  bool first = true;
  for (const auto& [k, v] : intent.slot_values.pairs()) {
    if (!first) out += " and ";
    first = false;
    const auto& table = phrase_table();
    if (auto it = table.find(k.slot); it != table.end()) {
      out += fill_template(it->second, k.domain, v);
    } else {
      out += k.domain + " with " + k.slot + " " + v;
    }
  }
  return out + ".";
}

double state_change_similarity(const StateChange& a, const StateChange& b) {
  std::set<SlotKey> slots_a, slots_b;
  std::set<SlotValuePair> pairs_a, pairs_b;
  for (const auto& [k, v] : a.pairs()) {
    slots_a.insert(k);
    pairs_a.insert({k, v});
  }
  for (const auto& [k, v] : b.pairs()) {
    slots_b.insert(k);
    pairs_b.insert({k, v});
  }
  return 0.5 * (set_f1(slots_a, slots_b) + set_f1(pairs_a, pairs_b));
}

EmbeddingIndex index_pool(std::span<const RetrievalExample> pool,
                          const EmbeddingProvider& provider, QueryField field) {
  std::vector<std::string> texts;
  texts.reserve(pool.size());
  for (const auto& e : pool) {
    texts.push_back(field == QueryField::masked ? e.query_text : e.context_text);
  }
  return EmbeddingIndex::build(provider, texts);
}

std::vector<ScoredExample> retrieve_top_k(std::span<const RetrievalExample> pool,
                                          const EmbeddingIndex& index,
                                          const EmbeddingVector& query, std::size_t k,
                                          const std::optional<ExampleSource>& exclude) {
  if (pool.empty()) throw EmptyPool();
  if (static_cast<std::size_t>(index.size()) != pool.size()) {
    throw Error("embedding index does not match the pool size");
  }
  Eigen::VectorXd s = index.cosine_scores(query);
  std::vector<double> scores(s.data(), s.data() + s.size());
  for (double& v : scores) v = std::round(v * kScoreScale) / kScoreScale;
  return top_k(pool, scores, k, exclude);
}

std::vector<ScoredExample> retrieve_top_k(std::span<const RetrievalExample> pool,
                                          const EmbeddingIndex& index,
                                          const MaskedDialogueInformation& query, std::size_t k,
                                          const EmbeddingProvider& provider,
                                          const std::optional<ExampleSource>& exclude) {
  return retrieve_top_k(pool, index, provider.embed(serialize_masked(query)), k, exclude);
}

std::vector<ScoredExample> brute_force_top_k_by_similarity(
    std::span<const RetrievalExample> pool, const Intent& intent, std::size_t k,
    const std::optional<ExampleSource>& exclude) {
  if (pool.empty()) throw EmptyPool();
  std::vector<double> scores;
  scores.reserve(pool.size());
  for (const auto& e : pool) scores.push_back(state_change_similarity(intent.slot_values, e.state_change));
  return top_k(pool, scores, k, exclude);
}

double recall_at_k(std::span<const ScoredExample> retrieved,
                   std::span<const RetrievalExample> pool, const StateChange& target,
                   std::size_t k, const std::optional<ExampleSource>& exclude) {
  if (retrieved.empty() || k == 0) return 0.0;
  std::vector<double> scores;
  for (const auto& e : pool) {
    if (exclude && e.source == *exclude) continue;
    scores.push_back(state_change_similarity(target, e.state_change));
  }
  if (scores.empty()) return 0.0;
  const std::size_t cut = std::min(k, scores.size());
  std::nth_element(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(cut - 1),
                   scores.end(), std::greater<>());
  const double threshold = scores[cut - 1];
  std::size_t hits = 0;
  for (const auto& r : retrieved) {
    if (state_change_similarity(target, r.example.state_change) >= threshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(cut);
}

std::vector<TrainingPair> mine_training_pairs(std::span<const RetrievalExample> pool,
                                              const MiningOptions& options) {
  std::vector<TrainingPair> out;
  DeterministicRng rng(options.seed);
  std::vector<double> scores(pool.size());
  for (std::size_t a = 0; a < pool.size(); ++a) {
    std::vector<std::size_t> peers;
    for (std::size_t b = 0; b < pool.size(); ++b) {
      if (b == a) continue;
      scores[b] = state_change_similarity(pool[a].state_change, pool[b].state_change);
      peers.push_back(b);
    }
    auto before = [&](std::size_t x, std::size_t y) {
      if (scores[x] != scores[y]) return scores[x] > scores[y];
      return pool[x].source < pool[y].source;
    };
    const std::size_t npos = std::min(options.positives_per_anchor, peers.size());
    std::partial_sort(peers.begin(), peers.begin() + static_cast<std::ptrdiff_t>(npos),
                      peers.end(), before);
    for (std::size_t i = 0; i < npos; ++i) {
      out.push_back({pool[a].query_text, pool[peers[i]].query_text, scores[peers[i]]});
    }

    std::vector<std::size_t> low;
    for (std::size_t i = npos; i < peers.size(); ++i) {
      if (scores[peers[i]] < options.negative_threshold) low.push_back(peers[i]);
    }
    // partial_sort leaves the tail unordered; restore a fixed order before sampling.
    std::sort(low.begin(), low.end());
    const std::size_t nneg = std::min(options.negatives_per_anchor, low.size());
    for (std::size_t i = 0; i < nneg; ++i) {
      std::swap(low[i], low[i + rng.below(low.size() - i)]);
      out.push_back({pool[a].query_text, pool[low[i]].query_text, scores[low[i]]});
    }
  }
  return out;
}

std::string training_pairs_jsonl(std::span<const TrainingPair> pairs) {
  std::string out;
  for (const auto& p : pairs) {
    nlohmann::ordered_json j;
    j["text_a"] = p.text_a;
    j["text_b"] = p.text_b;
    j["score"] = p.score;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace idic
