#pragma once

// Inter-annotator agreement (Fleiss' kappa) and ablation majority voting.

#include <optional>
#include <string>
#include <vector>

#include "twinsynth/corpus.hpp"

namespace twinsynth {

// counts[i][j]: raters who put item i in category j.
struct RatingMatrix {
  std::vector<std::vector<int>> counts;
  std::vector<std::string> categories;  // optional column names

  std::size_t items() const { return counts.size(); }
  int raters() const;  // row sum of the first row
  // Throws InvariantError: at least 2 items, at least 2 raters, equal row
  // sums, equal row widths, no negative counts.
  void validate() const;

  // Records carry either counts (fixed width) or one label per rater. Label
  // categories are the sorted distinct labels.
  static RatingMatrix from_records(const std::vector<RatingRecord>& records);
};

double fleiss_kappa(const RatingMatrix& m);

inline constexpr std::string_view kTieMarker = "<tie>";

struct VoteItem {
  std::string id;
  std::vector<std::optional<std::string>> choices;  // one per rater
};

struct VoteInput {
  std::string reference;  // the choice agreement is measured against
  std::size_t raters = 0;  // 0: the largest choice list
  std::vector<VoteItem> items;

  static VoteInput from_json(const Json& j);
};

struct VoteWinner {
  std::string id;
  std::string winner;  // kTieMarker on a modal tie
  bool tie = false;
};

struct VoteResult {
  std::vector<VoteWinner> winners;
  double agreement = 0;  // items won by the reference / items

  Json to_json() const;
};

// Throws MissingRatingError when an item lacks a rater's choice.
VoteResult majority_vote(const VoteInput& in);

}  // namespace twinsynth
