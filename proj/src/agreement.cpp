#include "twinsynth/agreement.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "twinsynth/errors.hpp"

namespace twinsynth {

int RatingMatrix::raters() const {
  if (counts.empty()) return 0;
  int n = 0;
  for (int c : counts.front()) n += c;
  return n;
}

void RatingMatrix::validate() const {
  if (counts.size() < 2) throw InvariantError("rating matrix needs at least 2 items");
  const auto width = counts.front().size();
  const int n = raters();
  if (n < 2) throw InvariantError("rating matrix needs at least 2 raters per item");
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const auto id = "item " + std::to_string(i);
    if (counts[i].size() != width) throw InvariantError("row width differs", id);
    int s = 0;
    for (int c : counts[i]) {
      if (c < 0) throw InvariantError("negative count", id);
      s += c;
    }
    if (s != n) throw InvariantError("row sums to " + std::to_string(s) + ", expected " + std::to_string(n), id);
  }
  if (!categories.empty() && categories.size() != width) throw InvariantError("category names do not match width");
}

RatingMatrix RatingMatrix::from_records(const std::vector<RatingRecord>& records) {
  RatingMatrix m;
  const bool labelled = !records.empty() && !records.front().labels.empty();
  if (!labelled) {
    for (const auto& r : records) {
      if (r.counts.empty()) throw InvariantError("rating record mixes counts and labels", r.id);
      m.counts.push_back(r.counts);
    }
    return m;
  }
  std::set<std::string> cats;
  for (const auto& r : records) {
    if (r.labels.empty()) throw InvariantError("rating record mixes counts and labels", r.id);
    cats.insert(r.labels.begin(), r.labels.end());
  }
  m.categories.assign(cats.begin(), cats.end());
  for (const auto& r : records) {
    std::vector<int> row(m.categories.size(), 0);
    for (const auto& l : r.labels) {
      ++row[static_cast<std::size_t>(std::lower_bound(m.categories.begin(), m.categories.end(), l) -
                                     m.categories.begin())];
    }
    m.counts.push_back(std::move(row));
  }
  return m;
}

double fleiss_kappa(const RatingMatrix& m) {
  m.validate();
  const double N = static_cast<double>(m.items());
  const double n = m.raters();
  const auto k = m.counts.front().size();
  std::vector<double> col(k, 0.0);
  double p_bar = 0;
  for (const auto& row : m.counts) {
    double sq = 0;
    for (std::size_t j = 0; j < k; ++j) {
      sq += static_cast<double>(row[j]) * row[j];
      col[j] += row[j];
    }
    p_bar += (sq - n) / (n * (n - 1));
  }
  p_bar /= N;
  double pe = 0;
  for (double c : col) {
    const double pj = c / (N * n);
    pe += pj * pj;
  }
  if (pe >= 1.0) {
    if (p_bar >= 1.0) return 1.0;
    throw DegenerateAgreementError("expected agreement is 1 but observed agreement is " + std::to_string(p_bar));
  }
  return (p_bar - pe) / (1.0 - pe);
}

VoteInput VoteInput::from_json(const Json& j) {
  if (!j.is_object() || !j.contains("items") || !j["items"].is_array()) {
    throw ParseError("vote file must be an object with an 'items' array");
  }
  VoteInput in;
  in.reference = j.value("reference", "");
  if (in.reference.empty()) throw ParseError("vote file needs a non-empty 'reference' choice");
  in.raters = j.value("raters", std::size_t{0});
  const auto& items = j["items"];
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& it = items[i];
    const auto where = "items[" + std::to_string(i) + "]";
    if (!it.is_object() || !it.contains("choices") || !it["choices"].is_array()) {
      throw ParseError("item needs a 'choices' array", where);
    }
    VoteItem v{it.value("id", std::to_string(i)), {}};
    for (const auto& c : it["choices"]) {
      if (c.is_null()) {
        v.choices.emplace_back(std::nullopt);
      } else if (c.is_string()) {
        v.choices.emplace_back(c.get<std::string>());
      } else {
        throw ParseError("choices must be strings or null", where);
      }
    }
    in.items.push_back(std::move(v));
  }
  return in;
}

Json VoteResult::to_json() const {
  Json w = Json::array();
  for (const auto& v : winners) w.push_back({{"id", v.id}, {"winner", v.winner}, {"tie", v.tie}});
  return {{"winners", w}, {"agreement", agreement}};
}

VoteResult majority_vote(const VoteInput& in) {
  std::size_t raters = in.raters;
  for (const auto& it : in.items) raters = std::max(raters, it.choices.size());
  VoteResult res;
  std::size_t hits = 0;
  for (const auto& it : in.items) {
    if (it.choices.size() < raters) {
      throw MissingRatingError("item '" + it.id + "' has " + std::to_string(it.choices.size()) + " of " +
                               std::to_string(raters) + " ratings");
    }
    std::map<std::string, int> tally;
    for (std::size_t r = 0; r < it.choices.size(); ++r) {
      if (!it.choices[r] || it.choices[r]->empty()) {
        throw MissingRatingError("item '" + it.id + "' lacks the rating of rater " + std::to_string(r));
      }
      ++tally[*it.choices[r]];
    }
    int best = 0;
    std::vector<std::string> modal;
    for (const auto& [choice, n] : tally) {
      if (n > best) {
        best = n;
        modal = {choice};
      } else if (n == best) {
        modal.push_back(choice);
      }
    }
    VoteWinner w{it.id, modal.size() == 1 ? modal.front() : std::string(kTieMarker), modal.size() != 1};
    if (!w.tie && w.winner == in.reference) ++hits;
    res.winners.push_back(std::move(w));
  }
  if (!in.items.empty()) res.agreement = static_cast<double>(hits) / static_cast<double>(in.items.size());
  return res;
}

}  // namespace twinsynth
