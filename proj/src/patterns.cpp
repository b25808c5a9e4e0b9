#include "lnmix/patterns.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace lnmix {

std::vector<std::vector<int>> ConditionDesign::units_by_condition() const {
  std::vector<std::vector<int>> out(condition_names.size());
  for (int i = 0; i < n_units(); ++i) out[unit_condition[i]].push_back(i);
  return out;
}

std::vector<int> ConditionDesign::condition_sizes() const {
  std::vector<int> out(condition_names.size(), 0);
  for (int c : unit_condition) ++out[c];
  return out;
}

int ConditionDesign::condition_index(const std::string& name) const {
  for (size_t c = 0; c < condition_names.size(); ++c)
    if (condition_names[c] == name) return static_cast<int>(c);
  return -1;
}

ConditionDesign ConditionDesign::from_unit_labels(const std::vector<std::string>& labels,
                                                  const std::vector<std::string>& unit_names) {
  if (labels.size() < 2) throw std::invalid_argument("design: need at least 2 experimental units");
  ConditionDesign d;
  std::unordered_map<std::string, int> index;
  for (const auto& lab : labels) {
    auto [it, inserted] = index.try_emplace(lab, static_cast<int>(d.condition_names.size()));
    if (inserted) d.condition_names.push_back(lab);
    d.unit_condition.push_back(it->second);
  }
  if (!unit_names.empty()) {
    if (unit_names.size() != labels.size())
      throw std::invalid_argument("design: unit name count does not match unit count");
    d.unit_names = unit_names;
  }
  return d;
}

std::vector<int> Pattern::group_sizes() const {
  std::vector<int> out(n_groups, 0);
  for (int g : group_of_unit) ++out[g];
  return out;
}

Pattern Pattern::from_unit_groups(const std::vector<int>& groups) {
  if (groups.empty()) throw std::invalid_argument("pattern: empty group assignment");
  Pattern p;
  p.group_of_unit.resize(groups.size());
  std::unordered_map<int, int> relabel;
  for (size_t i = 0; i < groups.size(); ++i) {
    auto [it, inserted] = relabel.try_emplace(groups[i], static_cast<int>(relabel.size()));
    p.group_of_unit[i] = it->second;
  }
  p.n_groups = static_cast<int>(relabel.size());
  return p;
}

Pattern Pattern::from_condition_groups(const std::vector<int>& condition_groups, const ConditionDesign& design) {
  if (static_cast<int>(condition_groups.size()) != design.n_conditions())
    throw std::invalid_argument("pattern: expected one group index per condition");
  std::vector<int> unit_groups(design.n_units());
  for (int i = 0; i < design.n_units(); ++i) unit_groups[i] = condition_groups[design.unit_condition[i]];
  return from_unit_groups(unit_groups);
}

std::vector<std::vector<uint8_t>> membership_matrix(const Pattern& p) {
  const int n = static_cast<int>(p.group_of_unit.size());
  std::vector<std::vector<uint8_t>> m(n, std::vector<uint8_t>(n, 0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m[i][j] = p.group_of_unit[i] == p.group_of_unit[j] ? 1 : 0;
  return m;
}

std::optional<int> PatternSet::null_index() const {
  for (int p = 0; p < size(); ++p)
    if (patterns[p].is_null()) return p;
  return std::nullopt;
}

PatternSet PatternSet::create(ConditionDesign design, std::vector<Pattern> patterns) {
  if (patterns.empty()) throw std::invalid_argument("pattern set: need at least one pattern");
  for (size_t p = 0; p < patterns.size(); ++p) {
    const Pattern& pat = patterns[p];
    if (static_cast<int>(pat.group_of_unit.size()) != design.n_units())
      throw std::invalid_argument("pattern set: pattern " + std::to_string(p + 1) + " has wrong length");
    for (int i = 0; i < design.n_units(); ++i)
      for (int j = i + 1; j < design.n_units(); ++j)
        if (design.unit_condition[i] == design.unit_condition[j] && pat.group_of_unit[i] != pat.group_of_unit[j])
          throw std::invalid_argument("pattern set: pattern " + std::to_string(p + 1) +
                                      " splits condition " + design.condition_names[design.unit_condition[i]]);
    for (size_t q = 0; q < p; ++q)
      if (patterns[q] == pat)
        throw std::invalid_argument("pattern set: patterns " + std::to_string(q + 1) + " and " +
                                    std::to_string(p + 1) + " are the same partition");
  }
  return PatternSet{std::move(design), std::move(patterns)};
}

PatternSet all_partition_patterns(const ConditionDesign& design) {
  const int t = design.n_conditions();
  std::vector<Pattern> out;
  std::vector<int> assign(t, 0);
  // restricted growth strings in lexicographic order; the all-zero string
  // (single group) comes first
  auto rec = [&](auto&& self, int pos, int used) -> void {
    if (pos == t) {
      out.push_back(Pattern::from_condition_groups(assign, design));
      return;
    }
    for (int g = 0; g <= used; ++g) {
      assign[pos] = g;
      self(self, pos + 1, std::max(used, g + 1));
    }
  };
  rec(rec, 0, 0);
  return PatternSet::create(design, std::move(out));
}

PatternSet vs_control_patterns(const ConditionDesign& design, const std::string& control) {
  const int ctrl = design.condition_index(control);
  if (ctrl < 0) throw std::invalid_argument("vs-control patterns: no condition named '" + control + "'");
  const int t = design.n_conditions();
  std::vector<int> others;
  for (int c = 0; c < t; ++c)
    if (c != ctrl) others.push_back(c);

  std::vector<Pattern> out;
  // subset mask: bit k set means others[k] is DE with the control and
  // therefore forms its own group
  for (uint32_t mask = 0; mask < (1u << others.size()); ++mask) {
    std::vector<int> assign(t, 0);
    int next = 1;
    for (size_t k = 0; k < others.size(); ++k)
      if (mask & (1u << k)) assign[others[k]] = next++;
    out.push_back(Pattern::from_condition_groups(assign, design));
  }
  return PatternSet::create(design, std::move(out));
}

PatternSet patterns_from_lines(const ConditionDesign& design, const std::vector<std::string>& lines) {
  std::vector<Pattern> out;
  for (size_t ln = 0; ln < lines.size(); ++ln) {
    std::istringstream is(lines[ln]);
    std::vector<int> groups;
    std::string tok;
    while (is >> tok) {
      try {
        size_t used = 0;
        const int g = std::stoi(tok, &used);
        if (used != tok.size() || g < 1) throw std::invalid_argument(tok);
        groups.push_back(g);
      } catch (const std::exception&) {
        throw std::invalid_argument("pattern file line " + std::to_string(ln + 1) + ": bad group index '" + tok + "'");
      }
    }
    if (groups.empty()) continue;  // blank line
    if (static_cast<int>(groups.size()) != design.n_conditions())
      throw std::invalid_argument("pattern file line " + std::to_string(ln + 1) + ": expected " +
                                  std::to_string(design.n_conditions()) + " group indices, got " +
                                  std::to_string(groups.size()));
    out.push_back(Pattern::from_condition_groups(groups, design));
  }
  return PatternSet::create(design, std::move(out));
}

PatternSet patterns_from_file(const ConditionDesign& design, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pattern file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return patterns_from_lines(design, lines);
}

std::vector<int> condition_groups_of(const Pattern& p, const ConditionDesign& design) {
  std::vector<int> out(design.n_conditions(), 0);
  for (int c = 0; c < design.n_conditions(); ++c) {
    for (int i = 0; i < design.n_units(); ++i) {
      if (design.unit_condition[i] == c) {
        out[c] = p.group_of_unit[i] + 1;
        break;
      }
    }
  }
  return out;
}

}  // namespace lnmix
