#pragma once

#include <compare>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cvm/runtime/component.hpp"
#include "cvm/runtime/ids.hpp"

namespace cvm {

struct ReceptacleRef {
  ComponentId component{};
  std::string receptacle;
  friend auto operator<=>(const ReceptacleRef&, const ReceptacleRef&) = default;
  friend bool operator==(const ReceptacleRef&, const ReceptacleRef&) = default;
};

struct FacetRef {
  ComponentId component{};
  std::string facet;
  friend bool operator==(const FacetRef&, const FacetRef&) = default;
};

struct Connection {
  ReceptacleRef source;
  FacetRef target;
  friend bool operator==(const Connection&, const Connection&) = default;
};

struct ConnectionTarget {
  FacetRef target;
  std::shared_ptr<ComponentInstance> instance;
};

// Immutable snapshot of every connection on a node. Receptacles are
// simplex: at most one entry per (component, receptacle).
class ConnectionTable {
 public:
  using Entries = std::map<ReceptacleRef, ConnectionTarget>;

  ConnectionTable() = default;
  explicit ConnectionTable(Entries entries) : entries_(std::move(entries)) {}

  const ConnectionTarget* find(ComponentId source, std::string_view receptacle) const;
  const Entries& entries() const noexcept { return entries_; }
  std::vector<Connection> connections() const;
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  Entries entries_;
};

struct RewireAction {
  enum class Kind { connect, disconnect };
  Kind kind = Kind::disconnect;
  ReceptacleRef source;
  FacetRef target;  // connect only

  static RewireAction connect(ComponentId src, std::string receptacle, ComponentId dst, std::string facet) {
    return {Kind::connect, {src, std::move(receptacle)}, {dst, std::move(facet)}};
  }
  static RewireAction disconnect(ComponentId src, std::string receptacle) {
    return {Kind::disconnect, {src, std::move(receptacle)}, {}};
  }
};

}  // namespace cvm
