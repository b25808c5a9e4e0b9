#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lnmix {

// Assignment of experimental units to conditions. Condition indices follow
// first appearance order in the unit list.
struct ConditionDesign {
  std::vector<std::string> condition_names;  // size T
  std::vector<int> unit_condition;           // size I, values in [0, T)
  std::vector<std::string> unit_names;       // size I, may be empty

  int n_units() const { return static_cast<int>(unit_condition.size()); }
  int n_conditions() const { return static_cast<int>(condition_names.size()); }

  // units grouped by condition, condition order
  std::vector<std::vector<int>> units_by_condition() const;
  std::vector<int> condition_sizes() const;
  int condition_index(const std::string& name) const;  // -1 if absent

  // Builds a design from per-unit condition labels; validates I >= 2 and
  // that every condition appears at least once (trivially true here).
  static ConditionDesign from_unit_labels(const std::vector<std::string>& labels,
                                          const std::vector<std::string>& unit_names = {});
};

// An expression pattern: a partition of units into equivalently expressed
// groups. Group indices are canonical (first appearance order, 0-based),
// so two equal partitions compare equal as vectors.
struct Pattern {
  std::vector<int> group_of_unit;  // size I
  int n_groups = 0;

  bool is_null() const { return n_groups == 1; }
  std::vector<int> group_sizes() const;

  // Canonicalizes arbitrary group labels by first appearance.
  static Pattern from_unit_groups(const std::vector<int>& groups);
  // Expands a per-condition assignment (length T) through a design.
  static Pattern from_condition_groups(const std::vector<int>& condition_groups, const ConditionDesign& design);

  bool operator==(const Pattern& other) const { return group_of_unit == other.group_of_unit; }
};

// M_p: symmetric 0/1 matrix, entry (i, j) = 1 iff units i and j share a group.
std::vector<std::vector<uint8_t>> membership_matrix(const Pattern& p);

// An ordered list of distinct patterns over a shared design.
struct PatternSet {
  ConditionDesign design;
  std::vector<Pattern> patterns;

  int size() const { return static_cast<int>(patterns.size()); }
  // index of the single-group pattern, if present
  std::optional<int> null_index() const;

  // Validates: P >= 1, pairwise distinct, every pattern keeps same-condition
  // units in one group. Throws std::invalid_argument on violation.
  static PatternSet create(ConditionDesign design, std::vector<Pattern> patterns);
};

// All set-partitions of the T conditions, null pattern first
// (restricted-growth-string order). P equals the Bell number B(T).
PatternSet all_partition_patterns(const ConditionDesign& design);

// Patterns where each non-control condition is independently EE or DE with
// the control and two non-control conditions are EE only when both are EE
// with the control. Null pattern first; P = 2^(T-1).
PatternSet vs_control_patterns(const ConditionDesign& design, const std::string& control);

// Plain-text pattern list: one pattern per line, T whitespace-separated
// group indices, one per condition in design order.
PatternSet patterns_from_lines(const ConditionDesign& design, const std::vector<std::string>& lines);
PatternSet patterns_from_file(const ConditionDesign& design, const std::string& path);

// Per-condition group labels (1-based) for writing pattern files.
std::vector<int> condition_groups_of(const Pattern& p, const ConditionDesign& design);

}  // namespace lnmix
