#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rtm/schema.hpp"
#include "rtm/timepoint.hpp"

namespace rtm {

/// Element identifiers are allocated by the graph: 1, 2, 3, ... in creation
/// order. Zero is never a valid id.
using ElementId = std::uint64_t;
inline constexpr ElementId kNoElement = 0;
inline constexpr ElementId kFirstElementId = 1;

struct CreateNode {
  std::string type;
  AttributeMap attributes;
  std::string symbol;  // name used in event files; optional
  bool operator==(const CreateNode&) const = default;
};

struct CreateEdge {
  std::string type;
  ElementId source = kNoElement;
  ElementId target = kNoElement;
  std::string symbol;
  bool operator==(const CreateEdge&) const = default;
};

struct DeleteElement {
  ElementId target = kNoElement;
  bool operator==(const DeleteElement&) const = default;
};

struct ChangeEvent {
  Timepoint timestamp;
  std::variant<CreateNode, CreateEdge, DeleteElement> action;
  bool operator==(const ChangeEvent&) const = default;

  bool is_creation() const noexcept { return !std::holds_alternative<DeleteElement>(action); }
};

/// References inside a sequence use the ids a fresh graph would assign when
/// replaying the sequence from the start.
using EventSequence = std::vector<ChangeEvent>;

class EventFileError : public std::runtime_error {
 public:
  EventFileError(const std::string& what, std::size_t line) : std::runtime_error(what), line_(line) {}
  /// 1-based line number, or 0 for I/O failures.
  std::size_t line() const noexcept { return line_; }
  bool is_io_failure() const noexcept { return line_ == 0; }

 private:
  std::size_t line_;
};

/// Line format:
///   <ts> CREATE_NODE <type> <sym> [<attr>=<value> ...]
///   <ts> CREATE_EDGE <type> <sym> <src-sym> <tgt-sym>
///   <ts> DELETE <sym>
/// '#' starts a comment line. Values that look like integers are integers;
/// strings may be double-quoted (with \" and \\ escapes).
EventSequence parse_events(const std::string& text);
std::string format_events(const EventSequence& events, const std::vector<std::string>& header = {});

EventSequence read_events(const std::filesystem::path& path);
void write_events(const std::filesystem::path& path, const EventSequence& events,
                  const std::vector<std::string>& header = {});

}  // namespace rtm
