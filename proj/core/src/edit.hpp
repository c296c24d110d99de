#pragma once

// Internal netlist-editing helpers shared by the rewrite and locking passes.

#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "locksmith/netlist.hpp"

namespace locksmith::edit {

// Mutable working copy with consumer tracking. Node storage is an id-keyed
// map; callers rebuild a Netlist with build().
struct Workspace {
  explicit Workspace(const Netlist& nl) : nl_(nl) {
    for (const Node& nd : nl.nodes) {
      nodes_[nd.id] = nd;
      ids_.insert(nd.id);
    }
    rebuild_consumers();
  }

  bool has(const std::string& id) const { return nodes_.count(id) != 0; }
  Node& node(const std::string& id) { return nodes_.at(id); }
  const Node& node(const std::string& id) const { return nodes_.at(id); }

  std::vector<std::string> ids() const {
    std::vector<std::string> out;
    out.reserve(nodes_.size());
    for (const auto& [id, nd] : nodes_) out.push_back(id);
    return out;
  }

  const std::vector<std::string>& consumers(const std::string& id) const {
    static const std::vector<std::string> empty;
    auto it = consumers_.find(id);
    return it == consumers_.end() ? empty : it->second;
  }

  bool is_output(const std::string& id) const {
    for (const std::string& o : nl_.outputs)
      if (o == id) return true;
    return false;
  }

  std::string fresh(const std::string& base) {
    std::string candidate = base;
    int i = 0;
    while (ids_.count(candidate)) candidate = base + "_" + std::to_string(++i);
    ids_.insert(candidate);
    return candidate;
  }

  Node& add(const std::string& id, GateKind kind, std::vector<std::string> fanin) {
    Node nd{id, kind, std::move(fanin), {}};
    for (const std::string& src : nd.fanin) consumers_[src].push_back(id);
    return nodes_[id] = std::move(nd);
  }

  // Repoints every fan-in reference of `consumer` from `from` to `to`,
  // keeping the consumer multiset consistent (one entry per occurrence).
  void repoint(const std::string& consumer, const std::string& from, const std::string& to) {
    Node& nd = nodes_.at(consumer);
    std::size_t hits = 0;
    for (std::string& src : nd.fanin)
      if (src == from) {
        src = to;
        ++hits;
      }
    if (hits == 0) return;
    auto& list = consumers_[from];
    for (auto it = list.begin(); it != list.end();) {
      if (*it == consumer)
        it = list.erase(it);
      else
        ++it;
    }
    for (std::size_t i = 0; i < hits; ++i) consumers_[to].push_back(consumer);
  }

  // Repoints all consumers of `from` to `to`.
  void repoint_all(const std::string& from, const std::string& to) {
    const std::vector<std::string> cs = consumers(from);
    for (const std::string& c : cs) repoint(c, from, to);
  }

  void set_fanin(const std::string& id, std::vector<std::string> fanin) {
    Node& nd = nodes_.at(id);
    for (const std::string& src : nd.fanin) {
      auto& list = consumers_[src];
      for (auto it = list.begin(); it != list.end();) {
        if (*it == id)
          it = list.erase(it);
        else
          ++it;
      }
    }
    nd.fanin = std::move(fanin);
    for (const std::string& src : nd.fanin) consumers_[src].push_back(id);
  }

  void erase(const std::string& id) {
    set_fanin(id, {});
    nodes_.erase(id);
    consumers_.erase(id);
    // id stays reserved in ids_ so fresh() never recycles it
  }

  // Removes gates with no consumers that are neither outputs nor protected.
  void sweep_dead(const std::set<std::string>& keep) {
    bool changed = true;
    while (changed) {
      changed = false;
      std::vector<std::string> doomed;
      for (const auto& [id, nd] : nodes_) {
        if (nd.kind == GateKind::Input) continue;
        if (keep.count(id) || is_output(id)) continue;
        if (consumers(id).empty()) doomed.push_back(id);
      }
      for (const std::string& id : doomed) {
        erase(id);
        changed = true;
      }
    }
  }

  // Rebuilds a validated netlist preserving the interface lists.
  Netlist build() const {
    Netlist out;
    out.name = nl_.name;
    out.key_prefix = nl_.key_prefix;
    out.primary_inputs = nl_.primary_inputs;
    out.outputs = nl_.outputs;
    for (const auto& [id, nd] : nodes_) out.nodes.push_back(nd);
    // key_inputs are re-derived by validate(); seed with every input id so
    // nothing is dropped.
    for (const auto& [id, nd] : nodes_) {
      if (nd.kind != GateKind::Input) continue;
      bool primary = false;
      for (const std::string& p : out.primary_inputs) primary |= (p == id);
      if (!primary) out.key_inputs.push_back(id);
    }
    validate(out);
    return out;
  }

  void rebuild_consumers() {
    consumers_.clear();
    for (const auto& [id, nd] : nodes_)
      for (const std::string& src : nd.fanin) consumers_[src].push_back(id);
  }

 private:
  const Netlist& nl_;
  std::map<std::string, Node> nodes_;  // ordered: deterministic iteration
  std::set<std::string> ids_;
  std::unordered_map<std::string, std::vector<std::string>> consumers_;
};

// Rewrites every consumer of `sig` to behave as if it read NOT(sig), leaving
// the producer untouched. Absorbs into XOR/XNOR/NOT/BUF/LUT/MUX-selector
// consumers; remaining consumers share one explicit NOT. Gates listed in
// `fence` never change kind; they fall into the explicit-NOT bucket.
// Throws if `sig` is a primary output (nothing downstream can absorb there).
void push_inversion(Workspace& ws, const std::string& sig, const std::set<std::string>& fence);

}  // namespace locksmith::edit
