#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "swarmsim/bytes.hpp"

namespace swarmsim {

// Hex SHA-256 of object content.
using ObjectHash = std::string;
// Hex SHA-256 of the commit's canonical form.
using CommitId = std::string;

struct Commit {
  std::optional<CommitId> parent;  // single-head linear history
  std::string author;
  Micros timestamp_us = 0;
  std::map<std::string, ObjectHash> tree;  // path -> object hash
  std::string message;
};

struct RefHead {
  std::string name;
  std::optional<CommitId> current;  // empty ref before first commit
};

struct ConflictReport {
  std::string ref;
  std::optional<CommitId> expected_parent;
  std::optional<CommitId> actual_head;
  std::vector<std::string> diverging_paths;  // changed by both sides
};

using CommitResult = std::variant<CommitId, ConflictReport>;

// In-memory content-addressed store with compare-and-swap refs.
class StateStore {
 public:
  ObjectHash put_object(const Bytes& content);
  std::optional<Bytes> get_object(const ObjectHash& hash) const;
  std::size_t object_count() const { return objects_.size(); }

  void create_ref(const std::string& name);
  const RefHead* find_ref(const std::string& name) const;
  const Commit* find_commit(const CommitId& id) const;

  // Succeeds iff ref.current == expected_parent; otherwise returns a
  // ConflictReport naming both heads and the paths changed by both the
  // attempted commit and the commits that advanced the ref past
  // expected_parent. No partial application. Throws std::out_of_range on
  // unknown ref.
  CommitResult commit(const std::string& ref,
                      const std::optional<CommitId>& expected_parent,
                      const std::string& author, Micros timestamp_us,
                      const std::map<std::string, ObjectHash>& changes,
                      const std::string& message);

  // Resolve a path through a ref head to object content.
  std::optional<Bytes> resolve(const std::string& ref,
                               const std::string& path) const;
  std::optional<ObjectHash> resolve_hash(const std::string& ref,
                                         const std::string& path) const;

  // Linear history of a ref, oldest first.
  std::vector<CommitId> history(const std::string& ref) const;

  // Directory of hash-named object files, commits/ subdirectory, and a
  // "refs" manifest.
  void export_dir(const std::string& dir) const;
  static StateStore import_dir(const std::string& dir);

 private:
  std::map<ObjectHash, Bytes> objects_;
  std::map<CommitId, Commit> commits_;
  std::map<std::string, RefHead> refs_;
};

std::string commit_canonical(const Commit& c);

}  // namespace swarmsim
