#include "swarmsim/stateplane.hpp"

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <stdexcept>

#include "swarmsim/digest.hpp"

namespace swarmsim {

using json = nlohmann::json;
namespace fs = std::filesystem;

ObjectHash StateStore::put_object(const Bytes& content) {
  ObjectHash hash = sha256_hex(content);
  objects_.emplace(hash, content);  // idempotent
  return hash;
}

std::optional<Bytes> StateStore::get_object(const ObjectHash& hash) const {
  auto it = objects_.find(hash);
  if (it == objects_.end()) return std::nullopt;
  return it->second;
}

void StateStore::create_ref(const std::string& name) {
  refs_.emplace(name, RefHead{name, std::nullopt});
}

const RefHead* StateStore::find_ref(const std::string& name) const {
  auto it = refs_.find(name);
  return it == refs_.end() ? nullptr : &it->second;
}

const Commit* StateStore::find_commit(const CommitId& id) const {
  auto it = commits_.find(id);
  return it == commits_.end() ? nullptr : &it->second;
}

std::string commit_canonical(const Commit& c) {
  json j = json::object();
  j["author"] = c.author;
  j["message"] = c.message;
  j["parent"] = c.parent ? json(*c.parent) : json(nullptr);
  json tree = json::object();
  for (const auto& [path, hash] : c.tree) tree[path] = hash;
  j["tree"] = tree;
  j["ts_us"] = c.timestamp_us;
  return j.dump();
}

CommitResult StateStore::commit(const std::string& ref,
                                const std::optional<CommitId>& expected_parent,
                                const std::string& author, Micros timestamp_us,
                                const std::map<std::string, ObjectHash>& changes,
                                const std::string& message) {
  auto it = refs_.find(ref);
  if (it == refs_.end()) throw std::out_of_range("unknown ref " + ref);
  if (author.empty()) throw std::invalid_argument("commit author empty");
  RefHead& head = it->second;

  if (head.current != expected_parent) {
    ConflictReport report;
    report.ref = ref;
    report.expected_parent = expected_parent;
    report.actual_head = head.current;
    // Paths the ref changed since expected_parent, intersected with the
    // attempted change set.
    std::set<std::string> theirs;
    std::optional<CommitId> cursor = head.current;
    while (cursor && cursor != expected_parent) {
      const Commit& c = commits_.at(*cursor);
      for (const auto& [path, hash] : c.tree) theirs.insert(path);
      cursor = c.parent;
    }
    for (const auto& [path, hash] : changes) {
      if (theirs.count(path)) report.diverging_paths.push_back(path);
    }
    return report;
  }

  Commit c;
  c.parent = head.current;
  c.author = author;
  c.timestamp_us = timestamp_us;
  c.tree = changes;
  c.message = message;
  CommitId id = sha256_hex(commit_canonical(c));
  commits_.emplace(id, std::move(c));
  head.current = id;
  return id;
}

std::optional<ObjectHash> StateStore::resolve_hash(const std::string& ref,
                                                   const std::string& path) const {
  auto it = refs_.find(ref);
  if (it == refs_.end()) return std::nullopt;
  std::optional<CommitId> cursor = it->second.current;
  // Walk back until a commit that touches the path.
  while (cursor) {
    const Commit& c = commits_.at(*cursor);
    auto pt = c.tree.find(path);
    if (pt != c.tree.end()) return pt->second;
    cursor = c.parent;
  }
  return std::nullopt;
}

std::optional<Bytes> StateStore::resolve(const std::string& ref,
                                         const std::string& path) const {
  auto hash = resolve_hash(ref, path);
  if (!hash) return std::nullopt;
  return get_object(*hash);
}

std::vector<CommitId> StateStore::history(const std::string& ref) const {
  std::vector<CommitId> out;
  auto it = refs_.find(ref);
  if (it == refs_.end()) return out;
  std::optional<CommitId> cursor = it->second.current;
  while (cursor) {
    out.push_back(*cursor);
    cursor = commits_.at(*cursor).parent;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

void StateStore::export_dir(const std::string& dir) const {
  fs::create_directories(fs::path(dir) / "objects");
  fs::create_directories(fs::path(dir) / "commits");
  for (const auto& [hash, content] : objects_) {
    std::ofstream out(fs::path(dir) / "objects" / hash, std::ios::binary);
    out.write(reinterpret_cast<const char*>(content.data()),
              static_cast<std::streamsize>(content.size()));
  }
  for (const auto& [id, c] : commits_) {
    std::ofstream out(fs::path(dir) / "commits" / id, std::ios::binary);
    const std::string body = commit_canonical(c);
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
  }
  json refs = json::object();
  for (const auto& [name, head] : refs_) {
    refs[name] = head.current ? json(*head.current) : json(nullptr);
  }
  std::ofstream out(fs::path(dir) / "refs");
  out << refs.dump(2) << "\n";
}

StateStore StateStore::import_dir(const std::string& dir) {
  StateStore store;
  const fs::path objects = fs::path(dir) / "objects";
  if (fs::exists(objects)) {
    for (const auto& entry : fs::directory_iterator(objects)) {
      std::ifstream in(entry.path(), std::ios::binary);
      Bytes content((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
      ObjectHash hash = store.put_object(content);
      if (hash != entry.path().filename().string()) {
        throw std::runtime_error("object file " +
                                 entry.path().filename().string() +
                                 " fails content-hash check");
      }
    }
  }
  const fs::path commits = fs::path(dir) / "commits";
  if (fs::exists(commits)) {
    for (const auto& entry : fs::directory_iterator(commits)) {
      std::ifstream in(entry.path(), std::ios::binary);
      json j = json::parse(in);
      Commit c;
      if (!j["parent"].is_null()) c.parent = j["parent"].get<std::string>();
      c.author = j["author"].get<std::string>();
      c.timestamp_us = j["ts_us"].get<Micros>();
      c.message = j["message"].get<std::string>();
      for (auto it = j["tree"].begin(); it != j["tree"].end(); ++it) {
        c.tree[it.key()] = it.value().get<std::string>();
      }
      store.commits_.emplace(entry.path().filename().string(), std::move(c));
    }
  }
  std::ifstream in(fs::path(dir) / "refs");
  if (in) {
    json refs = json::parse(in);
    for (auto it = refs.begin(); it != refs.end(); ++it) {
      RefHead head{it.key(), std::nullopt};
      if (!it.value().is_null()) head.current = it.value().get<std::string>();
      store.refs_[it.key()] = std::move(head);
    }
  }
  return store;
}

}  // namespace swarmsim
