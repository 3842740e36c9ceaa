#include "p2f/memory_sim.hpp"

#include <algorithm>
#include <numeric>


namespace p2f {
namespace {

bool states_slots(const MemoryStatement& s, std::span<const std::size_t> slots) {
  for (std::size_t k : slots) {
    if (k >= s.slot_values.size() || s.slot_values[k].empty()) return false;
  }
  return true;
}

// Jaccard over two sorted, duplicate-free token lists.
double sorted_jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  std::size_t inter = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++inter;
      ++i;
      ++j;
    }
  }
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

}  // namespace

std::string_view to_string(Origin origin) {
  return origin == Origin::Genuine ? "genuine" : "synthetic";
}

MemoryStatement MemoryStatement::make(std::string text, Origin origin, bool denied, bool affirmed,
                                      std::vector<std::string> slot_values, double match_weight) {
  if (denied && affirmed) throw InvalidArgument("statement cannot be both denied and affirmed");
  if (!(match_weight > 0.0)) throw InvalidArgument("statement match_weight must be positive");
  MemoryStatement s;
  s.content = tokenize(text);
  s.terms = normalized_tokens(text);
  std::sort(s.terms.begin(), s.terms.end());
  s.terms.erase(std::unique(s.terms.begin(), s.terms.end()), s.terms.end());
  s.text = std::move(text);
  s.origin = origin;
  s.denied = denied;
  s.affirmed = affirmed;
  s.slot_values = std::move(slot_values);
  s.match_weight = match_weight;
  return s;
}

void SimulatorParams::validate() const {
  if (!(leak_rate >= 0.0 && leak_rate <= 1.0)) {
    throw InvalidArgument("leak_rate must be in [0, 1]");
  }
  if (!(match_threshold >= 0.0 && match_threshold <= 1.0)) {
    throw InvalidArgument("match_threshold must be in [0, 1]");
  }
}

void MemorySimulator::ingest(std::span<const MemoryStatement> statements) {
  for (const auto& s : statements) {
    if (std::find(statements_.begin(), statements_.end(), s) == statements_.end()) {
      statements_.push_back(s);
    }
  }
}

const MemoryStatement* MemorySimulator::recall(std::string_view query,
                                               const SimulatorParams& params, Rng& rng,
                                               std::span<const std::size_t> slots) const {
  params.validate();
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();

  auto q = normalized_tokens(query);
  std::sort(q.begin(), q.end());
  q.erase(std::unique(q.begin(), q.end()), q.end());
  std::vector<std::pair<double, std::size_t>> matching;
  for (std::size_t i = 0; i < statements_.size(); ++i) {
    const auto& s = statements_[i];
    if (!s.slot_values.empty() && !states_slots(s, slots)) continue;
    const double score = sorted_jaccard(q, s.terms) * s.match_weight;
    if (score >= params.match_threshold) matching.emplace_back(score, i);
  }
  if (params.hinted && !matching.empty()) {
    const std::size_t k =
        matching.size() > params.hints ? std::max<std::size_t>(1, matching.size() - params.hints) : 1;
    std::stable_sort(matching.begin(), matching.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    matching.resize(k);
    std::sort(matching.begin(), matching.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
  }

  const bool leak = u1 < params.leak_rate;
  std::vector<std::size_t> pool;
  double total = 0.0;
  for (const auto& [score, i] : matching) {
    if (statements_[i].denied && !leak) continue;
    pool.push_back(i);
    total += statements_[i].match_weight;
  }
  if (pool.empty()) return nullptr;
  const double target = u2 * total;
  double acc = 0.0;
  for (std::size_t i : pool) {
    acc += statements_[i].match_weight;
    if (target < acc) return &statements_[i];
  }
  return &statements_[pool.back()];
}

std::string MemorySimulator::answer_attack(std::string_view query, const SimulatorParams& params,
                                           Rng& rng, std::optional<std::size_t> slot) const {
  std::vector<std::size_t> wanted;
  if (slot) wanted.push_back(*slot);
  const MemoryStatement* s = recall(query, params, rng, wanted);
  if (!s) return std::string(kRefusal);
  if (slot && *slot < s->slot_values.size()) return s->slot_values[*slot];
  return s->text;
}

std::string MemorySimulator::answer_attack(std::string_view query, const SimulatorParams& params,
                                           std::optional<std::size_t> slot) const {
  Rng rng(params.rng_seed);
  return answer_attack(query, params, rng, slot);
}

double expected_genuine_recall(std::size_t r, double leak_rate) {
  return leak_rate / static_cast<double>(r + 1);
}

double expected_exact_forgetfulness(std::size_t r, double leak_rate, std::size_t hints) {
  const std::size_t k = r + 1 > hints ? std::max<std::size_t>(1, r + 1 - hints) : 1;
  return 1.0 - leak_rate / static_cast<double>(k);
}

}  // namespace p2f
