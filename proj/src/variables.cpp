#include "scop/variables.hpp"

#include <stdexcept>
#include <unordered_set>

namespace scop {

VarId VariableTable::add(VarInfo info) {
  if (info.name.empty()) throw std::invalid_argument("variable name must not be empty");
  if (by_name_.contains(info.name)) throw std::invalid_argument("duplicate variable '" + info.name + "'");
  info.id = VarId{static_cast<std::uint32_t>(vars_.size())};
  by_name_.emplace(info.name, info.id.index);
  vars_.push_back(std::move(info));
  return vars_.back().id;
}

VarId VariableTable::add_decision(std::string name) {
  return add(VarInfo{VarId{}, std::move(name), VarKind::Decision, 0.0});
}

VarId VariableTable::add_stochastic(std::string name, double prob) {
  if (!(prob >= 0.0 && prob <= 1.0))
    throw std::invalid_argument("probability of '" + name + "' outside [0,1]");
  return add(VarInfo{VarId{}, std::move(name), VarKind::Stochastic, prob});
}

void VariableTable::reorder(std::span<const std::string> names) {
  std::vector<VarInfo> next;
  next.reserve(vars_.size());
  std::unordered_set<std::uint32_t> taken;
  for (const auto& n : names) {
    auto id = find(n);
    if (!id) throw std::invalid_argument("order: unknown variable '" + n + "'");
    if (!taken.insert(id->index).second) throw std::invalid_argument("order: variable '" + n + "' listed twice");
    next.push_back(vars_[id->index]);
  }
  for (const auto& v : vars_)
    if (!taken.contains(v.id.index)) next.push_back(v);

  vars_ = std::move(next);
  by_name_.clear();
  for (std::uint32_t i = 0; i < vars_.size(); ++i) {
    vars_[i].id = VarId{i};
    by_name_.emplace(vars_[i].name, i);
  }
}

std::optional<VarId> VariableTable::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return VarId{it->second};
}

VarId VariableTable::at(std::string_view name) const {
  auto id = find(name);
  if (!id) throw std::out_of_range("unknown variable '" + std::string(name) + "'");
  return *id;
}

std::vector<VarId> VariableTable::decisions() const {
  std::vector<VarId> out;
  for (const auto& v : vars_)
    if (v.is_decision()) out.push_back(v.id);
  return out;
}

std::size_t VariableTable::decision_count() const {
  std::size_t n = 0;
  for (const auto& v : vars_) n += v.is_decision() ? 1 : 0;
  return n;
}

bool operator==(const VariableTable& a, const VariableTable& b) {
  if (a.vars_.size() != b.vars_.size()) return false;
  for (std::size_t i = 0; i < a.vars_.size(); ++i) {
    const auto& x = a.vars_[i];
    const auto& y = b.vars_[i];
    if (x.name != y.name || x.kind != y.kind || x.prob != y.prob) return false;
  }
  return true;
}

}  // namespace scop
