#include "rtm/graph.hpp"

#include <algorithm>

namespace rtm {

const char* to_string(ModelErrorCode code) noexcept {
  switch (code) {
    case ModelErrorCode::kUnknownType: return "UnknownType";
    case ModelErrorCode::kUnknownElement: return "UnknownElement";
    case ModelErrorCode::kEndpointMissingOrDead: return "EndpointMissingOrDead";
    case ModelErrorCode::kEndpointTypeMismatch: return "EndpointTypeMismatch";
    case ModelErrorCode::kAttributeMismatch: return "AttributeMismatch";
    case ModelErrorCode::kDoubleDeletion: return "DoubleDeletion";
    case ModelErrorCode::kTimestampRegression: return "TimestampRegression";
  }
  return "ModelError";
}

ModelError::ModelError(ModelErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

// ---------------------------------------------------------------------------
// Subscriptions

struct Subscription::Registry {
  struct CreationEntry {
    std::uint64_t id;
    std::vector<char> accepts;  // indexed by TypeId
    CreationCallback callback;
  };
  struct AdvanceEntry {
    std::uint64_t id;
    AdvanceCallback callback;
  };

  std::vector<CreationEntry> creation;
  std::vector<AdvanceEntry> advance;
  std::uint64_t next_id = 1;

  void remove(std::uint64_t id) {
    std::erase_if(creation, [id](const auto& e) { return e.id == id; });
    std::erase_if(advance, [id](const auto& e) { return e.id == id; });
  }
};

Subscription::Subscription(Subscription&& other) noexcept
    : registry_(std::move(other.registry_)), id_(std::exchange(other.id_, 0)) {}

Subscription& Subscription::operator=(Subscription&& other) noexcept {
  if (this != &other) {
    reset();
    registry_ = std::move(other.registry_);
    id_ = std::exchange(other.id_, 0);
  }
  return *this;
}

Subscription::~Subscription() { reset(); }

void Subscription::reset() {
  if (id_ == 0) return;
  if (auto registry = registry_.lock()) registry->remove(id_);
  registry_.reset();
  id_ = 0;
}

// ---------------------------------------------------------------------------

TemporalGraph::TemporalGraph(TypeSchema schema)
    : schema_(std::move(schema)),
      buckets_(schema_.size()),
      registry_(std::make_shared<Subscription::Registry>()) {}

TemporalGraph::TemporalGraph(TemporalGraph&&) noexcept = default;
TemporalGraph& TemporalGraph::operator=(TemporalGraph&&) noexcept = default;
TemporalGraph::~TemporalGraph() = default;

Element* TemporalGraph::slot(ElementId id) noexcept {
  if (id < kFirstElementId || id >= next_id_) return nullptr;
  const std::size_t index = id - kFirstElementId;
  const std::size_t chunk = index >> kChunkBits;
  if (chunk >= chunks_.size() || !chunks_[chunk]) return nullptr;
  auto& entry = chunks_[chunk]->slots[index & (kChunkSize - 1)];
  return entry ? &*entry : nullptr;
}

const Element* TemporalGraph::find(ElementId id) const noexcept {
  return const_cast<TemporalGraph*>(this)->slot(id);
}

const Element& TemporalGraph::element(ElementId id) const {
  if (const auto* e = find(id)) return *e;
  throw ModelError(ModelErrorCode::kUnknownElement, "no element with id " + std::to_string(id));
}

Element& TemporalGraph::insert(Element element) {
  const std::size_t index = element.id - kFirstElementId;
  const std::size_t chunk = index >> kChunkBits;
  if (chunk >= chunks_.size()) chunks_.resize(chunk + 1);
  if (!chunks_[chunk]) chunks_[chunk] = std::make_unique<Chunk>();
  auto& bucket = buckets_[element.type];
  element.bucket_slot = static_cast<std::uint32_t>(bucket.size());
  bucket.push_back(element.id);
  (element.is_node() ? node_count_ : edge_count_) += 1;
  if (element.live()) ++live_count_;
  auto& entry = chunks_[chunk]->slots[index & (kChunkSize - 1)];
  entry.emplace(std::move(element));
  ++chunks_[chunk]->occupied;
  return *entry;
}

void TemporalGraph::erase_element(ElementId id) {
  Element* victim = slot(id);
  if (victim == nullptr) return;
  auto& bucket = buckets_[victim->type];
  const ElementId moved = bucket.back();
  bucket[victim->bucket_slot] = moved;
  if (moved != id) slot(moved)->bucket_slot = victim->bucket_slot;
  bucket.pop_back();
  (victim->is_node() ? node_count_ : edge_count_) -= 1;
  if (victim->live()) --live_count_;

  const std::size_t index = id - kFirstElementId;
  const std::size_t chunk = index >> kChunkBits;
  chunks_[chunk]->slots[index & (kChunkSize - 1)].reset();
  // Release chunks that are empty and will not receive new ids.
  const std::size_t tail_chunk = (next_id_ - kFirstElementId) >> kChunkBits;
  if (--chunks_[chunk]->occupied == 0 && chunk < tail_chunk) chunks_[chunk].reset();
}

void TemporalGraph::detach(EdgeList& list, std::uint32_t pos, bool outgoing) {
  auto& ids = list.ids_;
  ids[pos] = kNoElement;
  ++list.holes_;
  while (!ids.empty() && ids.back() == kNoElement) {
    ids.pop_back();
    --list.holes_;
  }
  if (list.holes_ < 8 || list.holes_ * 2 < ids.size()) return;
  std::size_t out = 0;
  for (ElementId e : ids) {
    if (e == kNoElement) continue;
    Element* m = slot(e);
    (outgoing ? m->source_slot : m->target_slot) = static_cast<std::uint32_t>(out);
    ids[out++] = e;
  }
  ids.resize(out);
  list.holes_ = 0;
}

void TemporalGraph::unlink_edge(Element& edge) {
  if (Element* src = slot(edge.source)) detach(src->out_edges, edge.source_slot, true);
  if (Element* tgt = slot(edge.target)) detach(tgt->in_edges, edge.target_slot, false);
}

std::size_t TemporalGraph::erase_node(ElementId id) {
  Element* node = slot(id);
  if (node == nullptr) throw ModelError(ModelErrorCode::kUnknownElement, "no element with id " + std::to_string(id));
  if (!node->is_node()) throw ModelError(ModelErrorCode::kUnknownElement, "element " + std::to_string(id) + " is an edge");
  std::vector<ElementId> incident = node->out_edges.to_vector();
  incident.reserve(node->out_edges.size() + node->in_edges.size());
  for (ElementId e : node->in_edges) {
    if (slot(e)->source != id) incident.push_back(e);  // self-loops are already listed
  }
  for (ElementId e : incident) {
    unlink_edge(*slot(e));
    erase_element(e);
  }
  erase_element(id);
  return incident.size();
}

void TemporalGraph::check_timestamp(Timepoint ts) const {
  if (ts.value < 0 || ts.is_infinite()) {
    throw ModelError(ModelErrorCode::kTimestampRegression, "invalid timestamp " + to_string(ts));
  }
  if (last_timestamp_ && ts < *last_timestamp_) {
    throw ModelError(ModelErrorCode::kTimestampRegression,
                     "timestamp " + to_string(ts) + " precedes " + to_string(*last_timestamp_));
  }
}

ElementId TemporalGraph::create_node(Timepoint ts, const CreateNode& action) {
  const auto type = schema_.find(action.type);
  if (!type || !schema_.is_node(*type)) {
    throw ModelError(ModelErrorCode::kUnknownType, "no node type '" + action.type + "'");
  }
  Element node;
  node.kind = ElementKind::kNode;
  node.type = *type;
  node.cts = ts;
  for (const auto& [name, value] : action.attributes) {
    const auto decl = schema_.attribute(*type, name);
    if (!decl) throw ModelError(ModelErrorCode::kAttributeMismatch, action.type + " has no attribute '" + name + "'");
    const bool is_int = std::holds_alternative<std::int64_t>(value);
    if (is_int != (decl->kind == AttributeKind::kInteger)) {
      throw ModelError(ModelErrorCode::kAttributeMismatch, "wrong value kind for '" + name + "'");
    }
    const AttributeKey key = schema_.attribute_key(name);
    if (node.attribute(key) != nullptr) throw ModelError(ModelErrorCode::kAttributeMismatch, "repeated attribute '" + name + "'");
    node.attributes.emplace_back(key, value);
  }
  node.id = next_id_++;
  return insert(std::move(node)).id;
}

ElementId TemporalGraph::create_edge(Timepoint ts, const CreateEdge& action) {
  const auto type = schema_.find(action.type);
  if (!type || schema_.is_node(*type)) {
    throw ModelError(ModelErrorCode::kUnknownType, "no edge type '" + action.type + "'");
  }
  Element* src = slot(action.source);
  Element* tgt = slot(action.target);
  if (src == nullptr || tgt == nullptr || !src->is_node() || !tgt->is_node() || !src->live() || !tgt->live()) {
    throw ModelError(ModelErrorCode::kEndpointMissingOrDead,
                     action.type + " endpoints " + std::to_string(action.source) + " -> " + std::to_string(action.target));
  }
  const auto& info = schema_.info(*type);
  if (!schema_.is_subtype(src->type, info.source) || !schema_.is_subtype(tgt->type, info.target)) {
    throw ModelError(ModelErrorCode::kEndpointTypeMismatch,
                     action.type + " cannot connect " + schema_.name(src->type) + " to " + schema_.name(tgt->type));
  }
  Element edge;
  edge.kind = ElementKind::kEdge;
  edge.type = *type;
  edge.cts = ts;
  edge.source = action.source;
  edge.target = action.target;
  edge.id = next_id_++;
  edge.source_slot = static_cast<std::uint32_t>(src->out_edges.ids_.size());
  src->out_edges.ids_.push_back(edge.id);
  edge.target_slot = static_cast<std::uint32_t>(tgt->in_edges.ids_.size());
  tgt->in_edges.ids_.push_back(edge.id);
  return insert(std::move(edge)).id;
}

bool TemporalGraph::delete_element(Timepoint ts, ElementId id) {
  Element* victim = slot(id);
  // Allocated but physically removed: the pruner already dropped it.
  if (victim == nullptr && id >= kFirstElementId && id < next_id_) return false;
  if (victim == nullptr) throw ModelError(ModelErrorCode::kUnknownElement, "no element with id " + std::to_string(id));
  if (!victim->live()) throw ModelError(ModelErrorCode::kDoubleDeletion, "element " + std::to_string(id) + " already deleted");
  victim->dts = ts;
  --live_count_;
  return true;
}

Delta TemporalGraph::apply_event(const ChangeEvent& event) {
  check_timestamp(event.timestamp);
  if (last_timestamp_ && event.timestamp > *last_timestamp_) {
    const Timepoint closed = *last_timestamp_;
    for (auto& entry : registry_->advance) entry.callback(closed, event.timestamp);
  }
  Delta delta;
  std::visit(
      [&](const auto& action) {
        using T = std::decay_t<decltype(action)>;
        if constexpr (std::is_same_v<T, CreateNode>) {
          delta.created.push_back(create_node(event.timestamp, action));
        } else if constexpr (std::is_same_v<T, CreateEdge>) {
          delta.created.push_back(create_edge(event.timestamp, action));
        } else {
          if (delete_element(event.timestamp, action.target)) delta.deleted.push_back(action.target);
        }
      },
      event.action);
  last_timestamp_ = event.timestamp;
  for (ElementId id : delta.created) notify_creation(*slot(id));
  return delta;
}

void TemporalGraph::notify_creation(const Element& element) {
  for (auto& entry : registry_->creation) {
    if (entry.accepts[element.type]) entry.callback(element);
  }
}

Subscription TemporalGraph::subscribe_creation(const std::vector<std::string>& types, CreationCallback callback) {
  Subscription::Registry::CreationEntry entry;
  entry.accepts.assign(schema_.size(), 0);
  for (const auto& name : types) {
    const auto type = schema_.find(name);
    if (!type) throw ModelError(ModelErrorCode::kUnknownType, "cannot subscribe to unknown type '" + name + "'");
    for (TypeId sub : schema_.subtypes(*type)) entry.accepts[sub] = 1;
  }
  entry.id = registry_->next_id++;
  entry.callback = std::move(callback);
  const auto id = entry.id;
  registry_->creation.push_back(std::move(entry));
  return Subscription(registry_, id);
}

Subscription TemporalGraph::subscribe_advance(AdvanceCallback callback) {
  const auto id = registry_->next_id++;
  registry_->advance.push_back({id, std::move(callback)});
  return Subscription(registry_, id);
}

std::vector<ElementId> TemporalGraph::elements_of_type(std::string_view type, std::optional<Timepoint> at) const {
  const auto id = schema_.find(type);
  if (!id) throw ModelError(ModelErrorCode::kUnknownType, "unknown type '" + std::string(type) + "'");
  return elements_of_type(*id, at);
}

std::vector<ElementId> TemporalGraph::elements_of_type(TypeId type, std::optional<Timepoint> at) const {
  if (type >= schema_.size()) throw ModelError(ModelErrorCode::kUnknownType, "type id " + std::to_string(type));
  std::vector<ElementId> out;
  for (TypeId sub : schema_.subtypes(type)) {
    for (ElementId id : buckets_[sub]) {
      if (!at || find(id)->exists_at(*at)) out.push_back(id);
    }
  }
  return out;
}

std::size_t TemporalGraph::count_of_type(TypeId type) const {
  std::size_t n = 0;
  for (TypeId sub : schema_.subtypes(type)) n += buckets_[sub].size();
  return n;
}

void TemporalGraph::for_each(const std::function<void(const Element&)>& visit) const {
  for (const auto& chunk : chunks_) {
    if (!chunk) continue;
    for (const auto& entry : chunk->slots) {
      if (entry) visit(*entry);
    }
  }
}

}  // namespace rtm
