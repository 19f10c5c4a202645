#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace scop {

/// Position of a variable in the global order. Smaller index = closer to the root.
struct VarId {
  std::uint32_t index = 0;

  friend auto operator<=>(const VarId&, const VarId&) = default;
};

enum class VarKind { Decision, Stochastic };

struct VarInfo {
  VarId id;
  std::string name;
  VarKind kind = VarKind::Decision;
  /// Probability of being true; meaningful for stochastic variables only.
  double prob = 0.0;

  bool is_decision() const { return kind == VarKind::Decision; }
};

/// Registry of decision and stochastic variables. Declaration order is the
/// variable order; `reorder` installs an explicit one.
class VariableTable {
 public:
  VarId add_decision(std::string name);
  VarId add_stochastic(std::string name, double prob);

  /// Permute the table so that `names` come first, in the given order, and
  /// every unlisted variable follows in its current relative order.
  /// Throws std::invalid_argument on unknown or repeated names.
  void reorder(std::span<const std::string> names);

  std::size_t size() const { return vars_.size(); }
  const VarInfo& operator[](VarId id) const { return vars_.at(id.index); }
  const std::vector<VarInfo>& all() const { return vars_; }

  std::optional<VarId> find(std::string_view name) const;
  VarId at(std::string_view name) const;  // throws std::out_of_range

  /// Decision variables in order.
  std::vector<VarId> decisions() const;
  std::size_t decision_count() const;

  friend bool operator==(const VariableTable& a, const VariableTable& b);

 private:
  VarId add(VarInfo info);

  std::vector<VarInfo> vars_;
  std::unordered_map<std::string, std::uint32_t> by_name_;
};

}  // namespace scop

template <>
struct std::hash<scop::VarId> {
  std::size_t operator()(const scop::VarId& v) const noexcept { return std::hash<std::uint32_t>{}(v.index); }
};
