#include "aoci/incremental.hpp"

#include "aoci/validator.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <cstdio>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace aoci {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find('\t', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos)
            return out;
        start = pos + 1;
    }
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t begin = 0;
    std::size_t line_no = 0;
    while (begin < text.size()) {
        auto nl = text.find('\n', begin);
        auto end = nl == std::string_view::npos ? text.size() : nl;
        auto line = text.substr(begin, end - begin);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        fn(line, ++line_no);
        if (nl == std::string_view::npos)
            break;
        begin = nl + 1;
    }
}

std::string path_at(std::string_view raw, std::size_t line_no, std::size_t column) {
    try {
        return canonical_path(raw);
    } catch (const InvalidPath& e) {
        throw ParseError(line_no, column, ParseErrorKind::InvalidPath, e.what());
    }
}

bool is_hex_digest(std::string_view s) {
    return s.size() == 64 && std::all_of(s.begin(), s.end(), [](char c) {
               return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
           });
}

} // namespace

ChangeSet parse_changeset(std::string_view text) {
    ChangeSet out;
    std::unordered_set<std::string> seen;
    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        if (line.find_first_not_of(" \t") == std::string_view::npos)
            return;
        auto fields = split_tabs(line);
        auto status = fields[0];
        auto column_of = [&](std::size_t field) {
            return static_cast<std::size_t>(fields[field].data() - line.data()) + 1;
        };
        ChangeRecord rec;
        std::size_t expected = 2;
        if (status == "A") {
            rec.status = ChangeStatus::Added;
        } else if (status == "M") {
            rec.status = ChangeStatus::Modified;
        } else if (status == "D") {
            rec.status = ChangeStatus::Deleted;
        } else if (status.size() >= 2 && status[0] == 'R' &&
                   std::all_of(status.begin() + 1, status.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
                   status.size() <= 4) {
            rec.status = ChangeStatus::Renamed;
            rec.similarity = std::stoi(std::string(status.substr(1)));
            if (rec.similarity > 100)
                throw ParseError(line_no, 1, ParseErrorKind::MalformedEntry, "rename score above 100");
            expected = 3;
        } else {
            throw ParseError(line_no, 1, ParseErrorKind::MalformedEntry,
                             "unknown change status '" + std::string(status) + "'");
        }
        if (fields.size() != expected)
            throw ParseError(line_no, std::min(line.size() + 1, fields.size() > expected ? column_of(expected) : line.size() + 1),
                             ParseErrorKind::MalformedEntry,
                             "expected " + std::to_string(expected) + " tab-separated fields");
        for (std::size_t i = 1; i < expected; ++i)
            if (fields[i].empty())
                throw ParseError(line_no, column_of(i), ParseErrorKind::MalformedEntry, "empty path field");
        rec.path = path_at(fields[1], line_no, column_of(1));
        if (expected == 3) {
            rec.new_path = path_at(fields[2], line_no, column_of(2));
            if (rec.new_path == rec.path)
                throw ParseError(line_no, column_of(2), ParseErrorKind::MalformedEntry, "rename onto itself");
        }
        if (!seen.insert(rec.path).second)
            throw ParseError(line_no, column_of(1), ParseErrorKind::DuplicateEntry, "path listed twice: " + rec.path);
        if (expected == 3 && !seen.insert(rec.new_path).second)
            throw ParseError(line_no, column_of(2), ParseErrorKind::DuplicateEntry, "path listed twice: " + rec.new_path);
        out.records.push_back(std::move(rec));
    });
    return out;
}

std::string serialize_changeset(const ChangeSet& changes) {
    std::string out;
    for (const auto& rec : changes.records) {
        switch (rec.status) {
        case ChangeStatus::Added: out += "A\t" + rec.path; break;
        case ChangeStatus::Modified: out += "M\t" + rec.path; break;
        case ChangeStatus::Deleted: out += "D\t" + rec.path; break;
        case ChangeStatus::Renamed: {
            char score[8];
            std::snprintf(score, sizeof score, "R%03d", rec.similarity);
            out += std::string(score) + "\t" + rec.path + "\t" + rec.new_path;
            break;
        }
        }
        out += '\n';
    }
    return out;
}

namespace {

std::unordered_set<std::string> resolution_targets(const std::vector<std::string>& paths) {
    std::unordered_set<std::string> targets;
    for (const auto& p : paths) {
        targets.insert(p);
        targets.insert(strip_extension(p));
        for (auto pos = p.find('/'); pos != std::string::npos; pos = p.find('/', pos + 1))
            targets.insert(p.substr(0, pos));
    }
    return targets;
}

// Rewritten form of `ref` under the rename map, if any rename names it.
std::optional<std::string> rewrite_ref(const std::string& ref, const std::map<std::string, std::string>& renames) {
    for (const auto& [from, to] : renames) {
        if (ref == from)
            return to;
        auto stem = strip_extension(from);
        if (stem != from && ref == stem)
            return strip_extension(to);
    }
    return std::nullopt;
}

} // namespace

UpdatePlan plan_update(const Index& index, const ChangeSet& changes) {
    changes.validate();
    UpdatePlan plan;
    std::set<std::string> regenerate_seen;
    auto regenerate = [&](const std::string& p) {
        if (regenerate_seen.insert(p).second)
            plan.regenerate.push_back(p);
    };

    for (const auto& rec : changes.records) {
        bool has_entry = index.find_entry(rec.path) != nullptr;
        switch (rec.status) {
        case ChangeStatus::Added:
            regenerate(rec.path);
            break;
        case ChangeStatus::Modified:
            if (has_entry)
                regenerate(rec.path);
            else
                plan.warnings.push_back("MissingEntry: modified file '" + rec.path + "' has no index entry");
            break;
        case ChangeStatus::Deleted:
            if (has_entry)
                plan.remove.push_back(rec.path);
            else
                plan.warnings.push_back("MissingEntry: deleted file '" + rec.path + "' has no index entry");
            break;
        case ChangeStatus::Renamed:
            if (has_entry) {
                plan.rename_map[rec.path] = rec.new_path;
                if (index.find_entry(rec.new_path))
                    plan.warnings.push_back("RenameTarget: '" + rec.new_path + "' already has an entry");
                if (rec.similarity < 100)
                    regenerate(rec.new_path);
            } else {
                plan.warnings.push_back("MissingEntry: renamed file '" + rec.path +
                                        "' has no index entry; treating '" + rec.new_path + "' as added");
                regenerate(rec.new_path);
            }
            break;
        }
    }

    std::set<std::string> removed(plan.remove.begin(), plan.remove.end());
    std::vector<std::string> before_paths;
    std::vector<std::string> after_paths;
    for (const auto& e : index.code_entries()) {
        before_paths.push_back(e.path);
        if (removed.count(e.path))
            continue;
        auto it = plan.rename_map.find(e.path);
        after_paths.push_back(it == plan.rename_map.end() ? e.path : it->second);
    }
    for (const auto& p : plan.regenerate)
        after_paths.push_back(p);
    auto before = resolution_targets(before_paths);
    auto after = resolution_targets(after_paths);

    for (const auto& e : index.code_entries()) {
        if (removed.count(e.path))
            continue;
        auto renamed = plan.rename_map.find(e.path);
        const std::string& host_after = renamed == plan.rename_map.end() ? e.path : renamed->second;
        for (const auto& ref : e.r) {
            std::string final_ref = ref;
            if (!plan.rename_map.empty()) {
                if (auto rewritten = rewrite_ref(ref, plan.rename_map)) {
                    plan.ref_rewrites.push_back({e.path, ref, *rewritten});
                    final_ref = *rewritten;
                }
            }
            if (before.count(ref) && !after.count(final_ref))
                plan.dangling_after.push_back({host_after, final_ref});
        }
    }
    return plan;
}

UpdateResult apply_update(const Index& index, const UpdatePlan& plan, const std::map<std::string, CodeEntry>& drafts) {
    std::set<std::string> regenerate(plan.regenerate.begin(), plan.regenerate.end());
    for (const auto& [path, draft] : drafts) {
        if (!regenerate.count(path))
            throw PlanMismatch("draft supplied for '" + path + "', which the plan does not regenerate");
        if (draft.path != path)
            throw PlanMismatch("draft keyed '" + path + "' describes '" + draft.path + "'");
    }
    std::set<std::string> removed(plan.remove.begin(), plan.remove.end());
    std::unordered_map<std::string, std::vector<const RefRewrite*>> rewrites;
    for (const auto& rw : plan.ref_rewrites)
        rewrites[rw.host].push_back(&rw);

    std::set<std::string> existing;
    for (const auto& e : index.code_entries())
        existing.insert(e.path);

    std::vector<CodeEntry> out;
    std::set<std::string> present;
    for (const auto& e : index.code_entries()) {
        if (removed.count(e.path))
            continue;
        CodeEntry next = e;
        if (auto it = rewrites.find(e.path); it != rewrites.end())
            for (const auto* rw : it->second)
                std::replace(next.r.begin(), next.r.end(), rw->old_ref, rw->new_ref);
        if (auto it = plan.rename_map.find(e.path); it != plan.rename_map.end()) {
            const auto& target = it->second;
            bool target_vacated = removed.count(target) || plan.rename_map.count(target);
            if (existing.count(target) && !target_vacated)
                throw PlanMismatch("rename target '" + target + "' already has an entry");
            next.path = target;
        }
        if (auto d = drafts.find(next.path); d != drafts.end())
            next = d->second;
        present.insert(next.path);
        out.push_back(std::move(next));
    }

    UpdateResult result;
    for (const auto& p : plan.regenerate) {
        auto d = drafts.find(p);
        if (d == drafts.end()) {
            result.pending.push_back(p);
            continue;
        }
        if (!present.count(p)) {
            out.push_back(d->second);
            present.insert(p);
        }
    }
    try {
        result.index = Index(index.header(), std::move(out), index.table_entries());
    } catch (const std::invalid_argument& e) {
        throw PlanMismatch(std::string("update produces an invalid index: ") + e.what());
    }
    return result;
}

std::string content_digest(std::string_view bytes) {
    unsigned char md[SHA256_DIGEST_LENGTH];
    SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), md);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * SHA256_DIGEST_LENGTH);
    for (unsigned char b : md) {
        out += kHex[b >> 4];
        out += kHex[b & 0xF];
    }
    return out;
}

const StalenessRecord* StalenessStore::find(const std::string& path) const {
    auto it = records_.find(path);
    return it == records_.end() ? nullptr : &it->second;
}

void StalenessStore::refresh(const std::string& path, std::string_view file_bytes, const CodeEntry* entry) {
    records_[path] = {content_digest(file_bytes), content_digest(entry ? serialize_entry(*entry) : std::string())};
}

StalenessStore StalenessStore::parse(std::string_view text) {
    StalenessStore store;
    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        if (line.empty())
            return;
        auto fields = split_tabs(line);
        if (fields.size() != 3)
            throw ParseError(line_no, 1, ParseErrorKind::MalformedEntry, "expected path<TAB>digest<TAB>digest");
        auto path = path_at(fields[0], line_no, 1);
        for (std::size_t i = 1; i < 3; ++i)
            if (!is_hex_digest(fields[i]))
                throw ParseError(line_no, static_cast<std::size_t>(fields[i].data() - line.data()) + 1,
                                 ParseErrorKind::MalformedEntry, "digest must be 64 lower-case hex digits");
        if (store.records_.count(path))
            throw ParseError(line_no, 1, ParseErrorKind::DuplicateEntry, "path listed twice: " + path);
        store.records_[path] = {std::string(fields[1]), std::string(fields[2])};
    });
    return store;
}

std::string StalenessStore::serialize() const {
    std::string out;
    for (const auto& [path, rec] : records_)
        out += path + "\t" + rec.content_digest + "\t" + rec.entry_digest + "\n";
    return out;
}

ChangeSet detect_stale(const StalenessStore& store, const std::vector<FileDigest>& files, const Index& index) {
    std::map<std::string, ChangeRecord> found;
    std::set<std::string> on_disk;
    for (const auto& f : files) {
        auto path = canonical_path(f.path);
        on_disk.insert(path);
        const auto* rec = store.find(path);
        if (!rec)
            found[path] = {ChangeStatus::Added, path, {}, 100};
        else if (rec->content_digest != f.digest)
            found[path] = {ChangeStatus::Modified, path, {}, 100};
    }
    for (const auto& [path, rec] : store.records())
        if (!on_disk.count(path))
            found[path] = {ChangeStatus::Deleted, path, {}, 100};
    for (const auto& e : index.code_entries())
        if (!on_disk.count(e.path) && !found.count(e.path))
            found[e.path] = {ChangeStatus::Deleted, e.path, {}, 100};

    ChangeSet out;
    for (auto& [path, rec] : found)
        out.records.push_back(std::move(rec));
    return out;
}

} // namespace aoci
