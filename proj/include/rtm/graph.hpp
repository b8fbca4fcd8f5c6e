#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rtm/events.hpp"
#include "rtm/schema.hpp"
#include "rtm/timepoint.hpp"

namespace rtm {

enum class ElementKind : std::uint8_t { kNode, kEdge };

/// Incident edge ids in insertion order. Removal leaves a hole that is
/// skipped on iteration; holes are compacted once they dominate.
class EdgeList {
 public:
  class iterator {
   public:
    using value_type = ElementId;
    using difference_type = std::ptrdiff_t;
    iterator() = default;
    iterator(const ElementId* at, const ElementId* end) : at_(at), end_(end) { skip(); }
    ElementId operator*() const noexcept { return *at_; }
    iterator& operator++() noexcept {
      ++at_;
      skip();
      return *this;
    }
    iterator operator++(int) noexcept {
      iterator old = *this;
      ++*this;
      return old;
    }
    bool operator==(const iterator& other) const noexcept { return at_ == other.at_; }

   private:
    void skip() noexcept {
      while (at_ != end_ && *at_ == kNoElement) ++at_;
    }
    const ElementId* at_ = nullptr;
    const ElementId* end_ = nullptr;
  };

  iterator begin() const noexcept { return {ids_.data(), ids_.data() + ids_.size()}; }
  iterator end() const noexcept { return {ids_.data() + ids_.size(), ids_.data() + ids_.size()}; }
  std::size_t size() const noexcept { return ids_.size() - holes_; }
  bool empty() const noexcept { return size() == 0; }
  std::vector<ElementId> to_vector() const { return {begin(), end()}; }
  /// Slots including holes; what the memory estimate should count.
  std::size_t capacity_slots() const noexcept { return ids_.capacity(); }

 private:
  friend class TemporalGraph;
  std::vector<ElementId> ids_;
  std::size_t holes_ = 0;
};

struct Element {
  ElementId id = kNoElement;
  ElementKind kind = ElementKind::kNode;
  TypeId type = 0;
  Timepoint cts;
  Timepoint dts = kInfinity;
  ElementId source = kNoElement;  // edges only
  ElementId target = kNoElement;  // edges only
  std::vector<std::pair<AttributeKey, AttributeValue>> attributes;
  EdgeList out_edges;  // nodes only, creation order
  EdgeList in_edges;   // nodes only, creation order

  // Positions inside the type bucket and the endpoints' edge lists;
  // maintained by TemporalGraph.
  std::uint32_t bucket_slot = 0;
  std::uint32_t source_slot = 0;
  std::uint32_t target_slot = 0;

  bool is_node() const noexcept { return kind == ElementKind::kNode; }
  bool live() const noexcept { return dts.is_infinite(); }
  bool exists_at(Timepoint at) const noexcept { return rtm::exists_at(cts, dts, at); }
  const AttributeValue* attribute(AttributeKey key) const noexcept {
    for (const auto& [k, v] : attributes) {
      if (k == key) return &v;
    }
    return nullptr;
  }
};

enum class ModelErrorCode : std::uint8_t {
  kUnknownType,
  kUnknownElement,
  kEndpointMissingOrDead,
  kEndpointTypeMismatch,
  kAttributeMismatch,
  kDoubleDeletion,
  kTimestampRegression,
};

const char* to_string(ModelErrorCode code) noexcept;

class ModelError : public std::runtime_error {
 public:
  ModelError(ModelErrorCode code, const std::string& detail);
  ModelErrorCode code() const noexcept { return code_; }

 private:
  ModelErrorCode code_;
};

struct Delta {
  std::vector<ElementId> created;
  std::vector<ElementId> deleted;
};

using CreationCallback = std::function<void(const Element&)>;
/// Fired before the first event of a later timepoint is applied; `closed` is
/// the timepoint whose events are now complete.
using AdvanceCallback = std::function<void(Timepoint closed, Timepoint next)>;

class TemporalGraph;

/// Move-only handle; unsubscribes on destruction. Safe to outlive the graph.
class Subscription {
 public:
  Subscription() = default;
  Subscription(const Subscription&) = delete;
  Subscription& operator=(const Subscription&) = delete;
  Subscription(Subscription&& other) noexcept;
  Subscription& operator=(Subscription&& other) noexcept;
  ~Subscription();

  void reset();
  explicit operator bool() const noexcept { return id_ != 0; }

 private:
  friend class TemporalGraph;
  struct Registry;
  Subscription(std::weak_ptr<Registry> registry, std::uint64_t id) : registry_(std::move(registry)), id_(id) {}

  std::weak_ptr<Registry> registry_;
  std::uint64_t id_ = 0;
};

/// The runtime model with history. Logical deletion only sets dts; elements
/// leave the store solely through erase_node (used by the pruner).
///
/// Single writer: apply_event and erase_node must be serialized externally.
class TemporalGraph {
 public:
  explicit TemporalGraph(TypeSchema schema);
  TemporalGraph(TemporalGraph&&) noexcept;
  TemporalGraph& operator=(TemporalGraph&&) noexcept;
  TemporalGraph(const TemporalGraph&) = delete;
  TemporalGraph& operator=(const TemporalGraph&) = delete;
  ~TemporalGraph();

  const TypeSchema& schema() const noexcept { return schema_; }

  /// Deleting an element that was already physically removed by pruning is
  /// a no-op with an empty delta.
  Delta apply_event(const ChangeEvent& event);

  Subscription subscribe_creation(const std::vector<std::string>& types, CreationCallback callback);
  Subscription subscribe_advance(AdvanceCallback callback);

  const Element* find(ElementId id) const noexcept;
  /// Throws ModelError(kUnknownElement) when absent.
  const Element& element(ElementId id) const;
  bool contains(ElementId id) const noexcept { return find(id) != nullptr; }

  /// Stored elements of `type` and its subtypes; with `at`, only those that
  /// exist at that timepoint.
  std::vector<ElementId> elements_of_type(std::string_view type, std::optional<Timepoint> at = std::nullopt) const;
  std::vector<ElementId> elements_of_type(TypeId type, std::optional<Timepoint> at = std::nullopt) const;
  /// Elements of exactly `type` (no subtypes), in unspecified order.
  std::span<const ElementId> bucket(TypeId type) const { return buckets_.at(type); }
  std::size_t count_of_type(TypeId type) const;

  std::size_t stored_count() const noexcept { return node_count_ + edge_count_; }
  std::size_t node_count() const noexcept { return node_count_; }
  std::size_t edge_count() const noexcept { return edge_count_; }
  std::size_t live_count() const noexcept { return live_count_; }

  /// Timestamp of the most recent event, if any has been applied.
  std::optional<Timepoint> last_timestamp() const noexcept { return last_timestamp_; }
  ElementId next_id() const noexcept { return next_id_; }

  /// Physically removes a node and all its incident edges. Returns the
  /// number of edges removed with it.
  std::size_t erase_node(ElementId id);

  /// Visits every stored element in id order.
  void for_each(const std::function<void(const Element&)>& visit) const;

 private:
  static constexpr unsigned kChunkBits = 12;
  static constexpr std::size_t kChunkSize = std::size_t{1} << kChunkBits;
  struct Chunk {
    std::array<std::optional<Element>, kChunkSize> slots;
    std::size_t occupied = 0;
  };

  Element* slot(ElementId id) noexcept;
  Element& insert(Element element);
  void erase_element(ElementId id);
  void unlink_edge(Element& edge);
  void detach(EdgeList& list, std::uint32_t pos, bool outgoing);
  void check_timestamp(Timepoint ts) const;
  void notify_creation(const Element& element);

  ElementId create_node(Timepoint ts, const CreateNode& action);
  ElementId create_edge(Timepoint ts, const CreateEdge& action);
  bool delete_element(Timepoint ts, ElementId id);

  TypeSchema schema_;
  std::vector<std::unique_ptr<Chunk>> chunks_;
  std::vector<std::vector<ElementId>> buckets_;
  ElementId next_id_ = kFirstElementId;
  std::size_t node_count_ = 0;
  std::size_t edge_count_ = 0;
  std::size_t live_count_ = 0;
  std::optional<Timepoint> last_timestamp_;
  std::shared_ptr<Subscription::Registry> registry_;
};

}  // namespace rtm
