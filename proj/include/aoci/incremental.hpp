#pragma once

// Incremental index maintenance: a change listing in, the minimal index
// update out. Only entries of changed files are touched, except that a
// rename also rewrites R references naming the old path.

#include "aoci/grammar.hpp"
#include "aoci/model.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aoci {

/// Parses name-status listings: "M\tpath", "A\tpath", "D\tpath",
/// "R<score>\told\tnew". Blank lines are skipped. Throws ParseError.
ChangeSet parse_changeset(std::string_view text);

std::string serialize_changeset(const ChangeSet& changes);

struct RefRewrite {
    std::string host;      // entry path before any rename in the plan
    std::string old_ref;
    std::string new_ref;
    bool operator==(const RefRewrite&) const = default;
};

struct DanglingRef {
    std::string host;
    std::string ref;
    bool operator==(const DanglingRef&) const = default;
};

struct UpdatePlan {
    std::vector<std::string> regenerate;
    std::vector<std::string> remove;
    std::map<std::string, std::string> rename_map;
    std::vector<RefRewrite> ref_rewrites;
    std::vector<DanglingRef> dangling_after;
    std::vector<std::string> warnings;   // MissingEntry and friends

    bool empty() const {
        return regenerate.empty() && remove.empty() && rename_map.empty() && ref_rewrites.empty() &&
               dangling_after.empty();
    }
};

UpdatePlan plan_update(const Index& index, const ChangeSet& changes);

class PlanMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct UpdateResult {
    Index index;
    std::vector<std::string> pending;   // regenerate paths with no draft
};

/// Applies a plan. Drafts replace regenerated entries (new paths are
/// appended in plan order); regenerate paths without a draft keep their old
/// entry and are reported pending. Throws PlanMismatch for a draft outside
/// plan.regenerate or a rename onto an existing entry.
UpdateResult apply_update(const Index& index, const UpdatePlan& plan,
                          const std::map<std::string, CodeEntry>& drafts = {});

/// Lower-case hex SHA-256 of the bytes.
std::string content_digest(std::string_view bytes);

struct StalenessRecord {
    std::string content_digest;
    std::string entry_digest;   // digest of the canonical entry line
    bool operator==(const StalenessRecord&) const = default;
};

/// path -> digests, persisted as "path\t<hex>\t<hex>" lines sorted by path.
class StalenessStore {
public:
    void set(const std::string& path, StalenessRecord record) { records_[path] = std::move(record); }
    void erase(const std::string& path) { records_.erase(path); }
    const StalenessRecord* find(const std::string& path) const;
    const std::map<std::string, StalenessRecord>& records() const { return records_; }

    /// Records the current file digest and entry-line digest for `path`.
    void refresh(const std::string& path, std::string_view file_bytes, const CodeEntry* entry);

    static StalenessStore parse(std::string_view text);
    std::string serialize() const;

    bool operator==(const StalenessStore&) const = default;

private:
    std::map<std::string, StalenessRecord> records_;
};

struct FileDigest {
    std::string path;
    std::string digest;
};

/// Modified for digest mismatches, Added for files the store has never
/// seen, Deleted for store records (or index entries) whose file is gone.
/// Records are sorted by path.
ChangeSet detect_stale(const StalenessStore& store, const std::vector<FileDigest>& files, const Index& index);

} // namespace aoci
