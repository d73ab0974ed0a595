#include "cli.hpp"

#include "aoci/ablation.hpp"
#include "aoci/grammar.hpp"
#include "aoci/incremental.hpp"
#include "aoci/metrics.hpp"
#include "aoci/scaffolder.hpp"
#include "aoci/validator.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace aoci::cli {

namespace {

struct Failure : std::runtime_error {
    Failure(int code, const std::string& message) : std::runtime_error(message), code(code) {}
    int code;
};

// Exclusive advisory lock held for the whole read-modify-write of a file.
class LockedFile {
public:
    LockedFile(const std::string& path, bool create) : path_(path) {
        fd_ = ::open(path.c_str(), O_RDWR | O_CLOEXEC | (create ? O_CREAT : 0), 0644);
        if (fd_ < 0)
            throw IoError("cannot open " + path + ": " + std::strerror(errno));
        if (::flock(fd_, LOCK_EX) != 0) {
            int e = errno;
            ::close(fd_);
            throw IoError("cannot lock " + path + ": " + std::strerror(e));
        }
    }
    LockedFile(const LockedFile&) = delete;
    LockedFile& operator=(const LockedFile&) = delete;
    ~LockedFile() { ::close(fd_); }

    std::string read() {
        std::string out;
        char buf[65536];
        if (::lseek(fd_, 0, SEEK_SET) < 0)
            fail("seek");
        for (;;) {
            auto n = ::read(fd_, buf, sizeof buf);
            if (n < 0) {
                if (errno == EINTR)
                    continue;
                fail("read");
            }
            if (n == 0)
                break;
            out.append(buf, static_cast<std::size_t>(n));
        }
        return out;
    }

    void replace(std::string_view text) {
        if (::ftruncate(fd_, 0) != 0 || ::lseek(fd_, 0, SEEK_SET) < 0)
            fail("truncate");
        while (!text.empty()) {
            auto n = ::write(fd_, text.data(), text.size());
            if (n < 0) {
                if (errno == EINTR)
                    continue;
                fail("write");
            }
            text.remove_prefix(static_cast<std::size_t>(n));
        }
        if (::fsync(fd_) != 0)
            fail("sync");
    }

private:
    [[noreturn]] void fail(const char* what) {
        throw IoError(std::string("cannot ") + what + " " + path_ + ": " + std::strerror(errno));
    }

    std::string path_;
    int fd_ = -1;
};

std::string read_stream(std::istream& in) {
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

std::string read_text(const std::string& path, std::istream& in) {
    if (path == "-")
        return read_stream(in);
    std::ifstream file(path, std::ios::binary);
    if (!file)
        throw IoError("cannot read " + path);
    std::string text = read_stream(file);
    if (file.bad())
        throw IoError("cannot read " + path);
    return text;
}

void write_text(const std::string& path, std::string_view text, std::ostream& out) {
    if (path == "-") {
        out << text;
        return;
    }
    LockedFile(path, true).replace(text);
}

void write_plain(const fs::path& path, std::string_view text) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    file.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!file)
        throw IoError("cannot write " + path.string());
}

std::string source_name(const std::string& path) {
    return path == "-" ? "<stdin>" : path;
}

ValidationIssue parse_issue(const std::string& source, const ParseError& e) {
    return {Severity::Error, "parse",
            source + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()),
            std::string(to_string(e.kind())) + ": " + e.message()};
}

[[noreturn]] void rethrow_located(const std::string& source, const ParseError& e) {
    throw Failure(kValidation, format_issue(parse_issue(source, e)));
}

Index load_index(const std::string& path, std::string_view text) {
    try {
        return parse_index(text);
    } catch (const ParseError& e) {
        rethrow_located(source_name(path), e);
    }
}

TokenEstimator resolve_estimator(const std::string& name) {
    if (name.empty())
        return estimator_from_env();
    if (auto m = parse_estimator(name))
        return *m;
    throw Failure(kUsage, "unknown estimator '" + name + "' (expected chars4 or words13)");
}

std::vector<std::string> nonblank_lines(std::string_view text) {
    std::vector<std::string> out;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.find_first_not_of(" \t") != std::string::npos)
            out.push_back(line);
    }
    return out;
}

void print_issues(const std::vector<ValidationIssue>& issues, std::ostream& out) {
    for (const auto& i : issues)
        out << format_issue(i) << '\n';
}

// ---- check ----------------------------------------------------------------

struct CheckOptions {
    std::string index;
    std::string files;
    std::string root;
    std::vector<std::string> include;
    std::vector<std::string> exclude;
    bool strict = false;
    std::string format = "text";
    std::string estimator;
};

int cmd_check(const CheckOptions& o, std::istream& in, std::ostream& out) {
    auto method = resolve_estimator(o.estimator);
    const auto text = read_text(o.index, in);
    auto parsed = parse_index_lenient(text);
    std::vector<ValidationIssue> issues;
    for (const auto& e : parsed.errors)
        issues.push_back(parse_issue(source_name(o.index), e));
    auto found = validate_index(parsed.index, method);
    issues.insert(issues.end(), found.begin(), found.end());

    if (!o.files.empty() || !o.root.empty()) {
        std::vector<std::string> files;
        if (!o.files.empty()) {
            if (o.files == "-" && o.index == "-")
                throw Failure(kUsage, "--files and the index cannot both be standard input");
            files = nonblank_lines(read_text(o.files, in));
        } else {
            for (auto& f : scan_repo(o.root))
                files.push_back(std::move(f.path));
        }
        auto report = check_coverage(parsed.index, files, o.include, o.exclude);
        for (const auto& p : report.unindexed)
            issues.push_back({Severity::Warning, "W5", p, "file has no index entry"});
        for (const auto& p : report.orphan_entries)
            issues.push_back({Severity::Warning, "W6", p, "entry names a file missing from the tree"});
    }

    if (o.format == "json")
        out << issues_to_json(issues) << '\n';
    else
        print_issues(issues, out);
    if (has_errors(issues) || (o.strict && !issues.empty()))
        return kValidation;
    return kSuccess;
}

// ---- fmt ------------------------------------------------------------------

struct FmtOptions {
    std::string index;
    bool verify = false;
    bool write = false;
};

int cmd_fmt(const FmtOptions& o, std::istream& in, std::ostream& out, std::ostream& err) {
    if (o.write) {
        if (o.index == "-")
            throw Failure(kUsage, "--write needs an index file, not standard input");
        LockedFile file(o.index, false);
        auto text = file.read();
        auto canonical = serialize_index(load_index(o.index, text));
        if (canonical != text)
            file.replace(canonical);
        return kSuccess;
    }
    const auto text = read_text(o.index, in);
    auto canonical = serialize_index(load_index(o.index, text));
    if (o.verify) {
        if (canonical == text)
            return kSuccess;
        err << source_name(o.index) << ": not in canonical form\n";
        return kValidation;
    }
    out << canonical;
    return kSuccess;
}

// ---- scaffold -------------------------------------------------------------

struct ScaffoldOptions {
    std::string root;
    std::string rules;
    std::string out;
    std::string prompts;
    std::string store;
    std::vector<std::string> include;
    std::vector<std::string> exclude;
};

std::optional<std::string> read_repo_file(const fs::path& root, const std::string& path) {
    std::ifstream file(root / path, std::ios::binary);
    if (!file)
        return std::nullopt;
    return read_stream(file);
}

int cmd_scaffold(const ScaffoldOptions& o, std::istream& in, std::ostream& out, std::ostream& err) {
    auto rules = ScaffoldRules::parse(read_text(o.rules, in));
    PathFilter filter(o.include, o.exclude);
    auto result = scaffold_repo(o.root, rules, filter);
    for (const auto& w : result.warnings)
        err << "warning " << w << '\n';

    write_text(o.out.empty() ? "-" : o.out, serialize_index(result.index), out);

    if (!o.prompts.empty()) {
        std::error_code ec;
        fs::create_directories(o.prompts, ec);
        if (ec)
            throw IoError("cannot create " + o.prompts + ": " + ec.message());
        auto packs = emit_prompt_pack(result.index, result.drafts, file_loader(o.root));
        for (const auto& p : packs.packs)
            write_plain(fs::path(o.prompts) / p.file_name, p.text);
        for (const auto& s : packs.skipped)
            err << "warning prompt pack skipped, source unreadable: " << s << '\n';
    }
    if (!o.store.empty()) {
        StalenessStore store;
        for (const auto& e : result.index.code_entries())
            if (auto bytes = read_repo_file(o.root, e.path))
                store.refresh(e.path, *bytes, &e);
        write_text(o.store, store.serialize(), out);
    }

    auto issues = validate_index(result.index);
    if (has_errors(issues)) {
        for (const auto& i : issues)
            if (i.severity == Severity::Error)
                err << format_issue(i) << '\n';
        return kValidation;
    }
    return kSuccess;
}

// ---- update ---------------------------------------------------------------

struct UpdateOptions {
    std::string index;
    std::string changes;
    std::string drafts;
    std::string store;
    std::string root = ".";
    std::vector<std::string> include;
    std::vector<std::string> exclude;
    bool detect = false;
    bool write = false;
};

std::map<std::string, CodeEntry> load_drafts(const std::string& dir, const Index& index, const UpdatePlan& plan,
                                             std::ostream& err) {
    std::map<std::string, CodeEntry> drafts;
    std::error_code ec;
    if (!fs::is_directory(dir, ec))
        throw IoError("not a readable directory: " + dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir, ec))
        if (entry.is_regular_file())
            files.push_back(entry.path());
    if (ec)
        throw IoError("cannot list " + dir + ": " + ec.message());
    std::sort(files.begin(), files.end());

    const std::set<std::string> wanted(plan.regenerate.begin(), plan.regenerate.end());
    for (const auto& file : files) {
        std::ifstream in(file, std::ios::binary);
        if (!in)
            throw IoError("cannot read " + file.string());
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (line.find_first_not_of(" \t") == std::string::npos)
                continue;
            CodeEntry entry;
            try {
                entry = parse_code_entry(line, index.dictionary());
            } catch (const ParseError& e) {
                ParseError located(line_no, e.column(), e.kind(), e.message());
                rethrow_located(file.string(), located);
            }
            if (!wanted.count(entry.path)) {
                err << "warning draft for " << entry.path << " ignored, path is not being regenerated\n";
                continue;
            }
            if (!drafts.emplace(entry.path, entry).second)
                throw Failure(kValidation, "error draft " + entry.path + ": supplied more than once");
        }
    }
    return drafts;
}

std::vector<FileDigest> digest_tree(const std::string& root, const PathFilter& filter) {
    std::vector<FileDigest> out;
    for (const auto& f : scan_repo(root, filter)) {
        auto bytes = read_repo_file(root, f.path);
        if (!bytes)
            throw IoError("cannot read " + (fs::path(root) / f.path).string());
        out.push_back({f.path, content_digest(*bytes)});
    }
    return out;
}

int cmd_update(const UpdateOptions& o, std::istream& in, std::ostream& out, std::ostream& err) {
    if (o.changes.empty() && !o.detect)
        throw Failure(kUsage, "update needs --changes or --detect");
    if (o.detect && o.store.empty())
        throw Failure(kUsage, "--detect needs --store");
    if (o.write && o.index == "-")
        throw Failure(kUsage, "--write needs an index file, not standard input");
    if (o.changes == "-" && o.index == "-")
        throw Failure(kUsage, "--changes and the index cannot both be standard input");

    std::optional<LockedFile> locked;
    std::string text;
    if (o.write) {
        locked.emplace(o.index, false);
        text = locked->read();
    } else {
        text = read_text(o.index, in);
    }
    const auto index = load_index(o.index, text);
    const PathFilter filter(o.include, o.exclude);

    ChangeSet changes;
    std::optional<StalenessStore> store;
    if (!o.store.empty()) {
        std::error_code ec;
        if (fs::exists(o.store, ec)) {
            try {
                store = StalenessStore::parse(read_text(o.store, in));
            } catch (const ParseError& e) {
                rethrow_located(o.store, e);
            }
        } else if (o.detect) {
            // First run: record the current tree and report nothing.
            StalenessStore seeded;
            for (const auto& f : scan_repo(o.root, filter)) {
                if (auto bytes = read_repo_file(o.root, f.path))
                    seeded.refresh(f.path, *bytes, index.find_entry(f.path));
            }
            write_text(o.store, seeded.serialize(), out);
            return kSuccess;
        } else {
            store.emplace();
        }
    }
    if (o.detect)
        changes = detect_stale(*store, digest_tree(o.root, filter), index);
    if (!o.changes.empty()) {
        ChangeSet listed;
        try {
            listed = parse_changeset(read_text(o.changes, in));
        } catch (const ParseError& e) {
            rethrow_located(source_name(o.changes), e);
        }
        changes.records.insert(changes.records.end(), listed.records.begin(), listed.records.end());
        changes.validate();
    }

    auto plan = plan_update(index, changes);
    for (const auto& w : plan.warnings)
        err << "warning " << w << '\n';
    std::map<std::string, CodeEntry> drafts;
    if (!o.drafts.empty())
        drafts = load_drafts(o.drafts, index, plan, err);
    auto result = apply_update(index, plan, drafts);
    for (const auto& p : result.pending)
        err << "pending " << p << '\n';

    const auto updated = serialize_index(result.index);
    if (o.write) {
        if (updated != text)
            locked->replace(updated);
    } else {
        out << updated;
    }

    if (store && o.write) {
        const std::set<std::string> pending(result.pending.begin(), result.pending.end());
        for (const auto& p : plan.remove)
            store->erase(p);
        for (const auto& [from, to] : plan.rename_map) {
            store->erase(from);
            if (!pending.count(to))
                if (auto bytes = read_repo_file(o.root, to))
                    store->refresh(to, *bytes, result.index.find_entry(to));
        }
        for (const auto& p : plan.regenerate) {
            if (pending.count(p))
                continue;
            if (auto bytes = read_repo_file(o.root, p))
                store->refresh(p, *bytes, result.index.find_entry(p));
        }
        write_text(o.store, store->serialize(), out);
    }

    auto issues = validate_index(result.index);
    if (has_errors(issues)) {
        for (const auto& i : issues)
            if (i.severity == Severity::Error)
                err << format_issue(i) << '\n';
        return kValidation;
    }
    return kSuccess;
}

// ---- ablate ---------------------------------------------------------------

struct AblateOptions {
    std::string index;
    std::string variant;
    bool tables = false;
    bool report = false;
    std::string estimator;
};

int cmd_ablate(const AblateOptions& o, std::istream& in, std::ostream& out) {
    auto method = resolve_estimator(o.estimator);
    const auto index = load_index(o.index, read_text(o.index, in));
    std::string lower = o.variant;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "nl-rewrite") {
        out << nl_rewrite_prompt(index);
        return kSuccess;
    }
    auto variant = parse_variant(o.variant);
    if (!variant) {
        std::string names;
        for (auto v : kAblationVariants)
            names += std::string(names.empty() ? "" : ", ") + std::string(to_string(v));
        throw Failure(kUsage, "unknown variant '" + o.variant + "' (expected " + names + " or NL-rewrite)");
    }
    auto ablated = apply_ablation(index, *variant, o.tables);
    if (!o.report) {
        out << serialize_index(ablated);
        return kSuccess;
    }
    auto r = ablation_report(index, ablated, method);
    out << std::fixed;
    out << "variant          " << to_string(*variant) << '\n'
        << "estimator        " << to_string(method) << '\n'
        << "original tokens  " << r.original_tokens << '\n'
        << "ablated tokens   " << r.ablated_tokens << '\n'
        << "reduction        " << r.reduction << " (" << std::setprecision(2) << r.relative_reduction * 100.0
        << "%)\n"
        << "ratio            " << std::setprecision(4) << r.ratio << '\n'
        << "entries changed  " << r.entries_changed << '\n'
        << "tables changed   " << r.tables_changed << '\n'
        << "tags removed     " << r.tags_removed << '\n';
    return kSuccess;
}

// ---- stats ----------------------------------------------------------------

struct StatsOptions {
    std::string index;
    long long loc = -1;
    bool json = false;
    std::string estimator;
};

template <class Map>
std::string histogram(const Map& m) {
    std::ostringstream s;
    bool first = true;
    for (const auto& [k, v] : m) {
        s << (first ? "" : " ") << k << ':' << v;
        first = false;
    }
    return first ? "-" : s.str();
}

template <class Map>
nlohmann::json json_map(const Map& m) {
    auto obj = nlohmann::json::object();
    for (const auto& [k, v] : m) {
        if constexpr (std::is_same_v<typename Map::key_type, int>)
            obj[std::to_string(k)] = v;
        else
            obj[k] = v;
    }
    return obj;
}

int cmd_stats(const StatsOptions& o, std::istream& in, std::ostream& out) {
    auto method = resolve_estimator(o.estimator);
    const auto index = load_index(o.index, read_text(o.index, in));
    std::optional<std::size_t> loc;
    if (o.loc >= 0)
        loc = static_cast<std::size_t>(o.loc);
    auto st = index_stats(index, loc, method);

    if (o.json) {
        nlohmann::json j;
        j["estimator"] = to_string(st.estimator);
        j["entries"] = {{"code", st.code_entries},
                        {"tables", st.table_entries},
                        {"tagged", st.tagged_entries},
                        {"untagged", st.untagged_entries},
                        {"scale_absent", st.scale_absent},
                        {"scale_only", st.scale_only_entries}};
        j["by_layer"] = json_map(st.by_layer);
        j["by_module"] = json_map(st.by_module);
        j["by_importance"] = json_map(st.by_importance);
        j["by_feature"] = json_map(st.by_feature);
        j["by_scale"] = json_map(st.by_scale);
        j["by_table_domain"] = json_map(st.by_table_domain);
        j["tokens"] = {{"header", st.header_tokens},
                       {"entries", st.entry_tokens},
                       {"tables", st.table_tokens},
                       {"total", st.total_tokens}};
        j["tokens_by_importance"] = json_map(st.tokens_by_importance);
        auto budget = nlohmann::json::object();
        for (const auto& [c, b] : st.budget_compliance)
            budget[std::to_string(c)] = {{"within", b.within}, {"under", b.under}, {"over", b.over}};
        j["budget_compliance"] = budget;
        j["repo_loc"] = st.repo_loc ? nlohmann::json(*st.repo_loc) : nlohmann::json(nullptr);
        j["compression_ratio"] = st.compression_ratio ? nlohmann::json(*st.compression_ratio) : nlohmann::json(nullptr);
        out << j.dump(2) << '\n';
        return kSuccess;
    }

    auto row = [&](std::string_view label, const std::string& value) {
        out << std::left << std::setw(18) << label << value << '\n';
    };
    row("code entries", std::to_string(st.code_entries) + " (tagged " + std::to_string(st.tagged_entries) +
                            ", untagged " + std::to_string(st.untagged_entries) + ", size-only " +
                            std::to_string(st.scale_only_entries) + ", no E " + std::to_string(st.scale_absent) + ")");
    row("table entries", std::to_string(st.table_entries));
    row("importance", histogram(st.by_importance));
    row("layer", histogram(st.by_layer));
    row("module", histogram(st.by_module));
    row("features", histogram(st.by_feature));
    row("scale", histogram(st.by_scale));
    row("table domains", histogram(st.by_table_domain));
    row("tokens", "header " + std::to_string(st.header_tokens) + ", entries " + std::to_string(st.entry_tokens) +
                      ", tables " + std::to_string(st.table_tokens) + ", total " + std::to_string(st.total_tokens));
    row("semantic by C", histogram(st.tokens_by_importance));
    for (const auto& [c, b] : st.budget_compliance)
        row("budget C=" + std::to_string(c), "within " + std::to_string(b.within) + ", under " +
                                                  std::to_string(b.under) + ", over " + std::to_string(b.over));
    if (st.compression_ratio) {
        std::ostringstream s;
        s << std::fixed << std::setprecision(4) << *st.compression_ratio << " tokens/LOC (" << *st.repo_loc
          << " LOC)";
        row("compression", s.str());
    }
    row("estimator", std::string(to_string(st.estimator)));
    return kSuccess;
}

// ---- score ----------------------------------------------------------------

struct ScoreOptions {
    std::string pred;
    std::string truth;
};

int cmd_score_where(const ScoreOptions& o, std::istream& in, std::ostream& out) {
    auto pred = nonblank_lines(read_text(o.pred, in));
    auto truth = nonblank_lines(read_text(o.truth, in));
    if (pred.size() != truth.size())
        throw Failure(kUsage, "--pred has " + std::to_string(pred.size()) + " paths but --truth has " +
                                  std::to_string(truth.size()));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        hits += static_cast<std::size_t>(score_where(pred[i], truth[i]));
    double accuracy = pred.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(pred.size());
    out << "where " << hits << '/' << pred.size() << ' ' << std::fixed << std::setprecision(4) << accuracy << '\n';
    return kSuccess;
}

int cmd_score_what(const ScoreOptions& o, std::istream& in, std::ostream& out) {
    auto s = score_what(nonblank_lines(read_text(o.pred, in)), nonblank_lines(read_text(o.truth, in)));
    out << std::fixed << std::setprecision(4) << "what precision " << s.precision << " recall " << s.recall << " f1 "
        << s.f1 << " (matched " << s.matched << ", predicted " << s.predicted << ", truth " << s.truth << ")\n";
    return kSuccess;
}

// ---- decode-tag -----------------------------------------------------------

struct DecodeOptions {
    std::string tag;
    std::string index;
};

int cmd_decode_tag(const DecodeOptions& o, std::istream& in, std::ostream& out, std::ostream& err) {
    const auto index = load_index(o.index, read_text(o.index, in));
    const auto& dict = index.dictionary();
    std::string tag = o.tag;
    if (tag.size() >= 2 && tag.front() == '[' && tag.back() == ']')
        tag = tag.substr(1, tag.size() - 2);
    auto line = [&](std::string_view name, const std::string& code, const CodeMap& dim) {
        const auto* label = dim.label(code);
        out << std::left << std::setw(11) << name << code;
        if (label)
            out << ' ' << *label;
        out << '\n';
    };
    try {
        if (tag.find('-') != std::string::npos) {
            auto t = decode_table_tag(tag, dict);
            line("domain", t.domain, dict.table_domain);
            line("type", t.ttype, dict.table_type);
            line("scale", t.scale, dict.table_scale);
            for (const auto& f : t.features)
                line("feature", f, dict.table_feat);
            return kSuccess;
        }
        auto d = decode_entry_tag(tag, dict);
        if (!d.scale_only()) {
            line("layer", d.layer, dict.dim_a);
            line("module", d.module, dict.dim_b);
            out << std::left << std::setw(11) << "importance" << d.importance << '\n';
            for (const auto& f : d.features)
                line("feature", f, dict.dim_d);
        }
        if (d.scale)
            line("scale", *d.scale, dict.dim_e);
        return kSuccess;
    } catch (const TagError& e) {
        err << "error " << to_string(e.kind()) << " [" << tag << "]: " << e.what() << '\n';
        return kValidation;
    } catch (const ParseError& e) {
        err << "error " << to_string(e.kind()) << " [" << tag << "]: " << e.message() << '\n';
        return kValidation;
    }
}

} // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Parse, validate, generate and maintain AOCI repository indexes.", "aoci"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "aoci 0.1.0");

    CheckOptions check;
    auto* c = app.add_subcommand("check", "Parse and validate an index, optionally against the file tree");
    c->add_option("index", check.index, "Index file or '-'")->required();
    c->add_option("--files", check.files, "Newline-delimited list of repository files for coverage");
    c->add_option("--root", check.root, "Repository root to scan for coverage instead of --files")
        ->excludes(c->get_option("--files"));
    c->add_option("--include", check.include, "Glob of eligible files (repeatable)");
    c->add_option("--exclude", check.exclude, "Glob of ignored files (repeatable)");
    c->add_flag("--strict", check.strict, "Fail on warnings too");
    c->add_option("--format", check.format, "Issue format")->check(CLI::IsMember({"text", "json"}));
    c->add_option("--estimator", check.estimator, "chars4 or words13 (default: $AOCI_ESTIMATOR or chars4)");

    FmtOptions fmt;
    auto* f = app.add_subcommand("fmt", "Print the canonical serialization of an index");
    f->add_option("index", fmt.index, "Index file or '-'")->required();
    auto* verify_flag = f->add_flag("--verify", fmt.verify, "Exit 1 if the file is not byte-identical to canonical form");
    f->add_flag("--write", fmt.write, "Rewrite the file in place")->excludes(verify_flag);

    ScaffoldOptions scaffold;
    auto* s = app.add_subcommand("scaffold", "Draft an index for a repository");
    s->add_option("root", scaffold.root, "Repository root")->required();
    s->add_option("--rules", scaffold.rules, "Rules file or '-'")->required();
    s->add_option("--out", scaffold.out, "Write the index here instead of standard output");
    s->add_option("--prompts", scaffold.prompts, "Directory for one prompt pack per entry");
    s->add_option("--store", scaffold.store, "Write a staleness store for the drafted tree");
    s->add_option("--include", scaffold.include, "Glob of eligible files (repeatable)");
    s->add_option("--exclude", scaffold.exclude, "Glob of ignored files (repeatable)");

    UpdateOptions update;
    auto* u = app.add_subcommand("update", "Apply a change listing to an index");
    u->add_option("index", update.index, "Index file or '-'")->required();
    u->add_option("--changes", update.changes, "Name-status change listing or '-'");
    u->add_option("--drafts", update.drafts, "Directory of files holding replacement entry lines");
    u->add_flag("--detect", update.detect, "Derive changes from content digests");
    u->add_option("--store", update.store, "Staleness store file");
    u->add_option("--root", update.root, "Repository root for --detect and store refresh")->capture_default_str();
    u->add_option("--include", update.include, "Glob of eligible files (repeatable)");
    u->add_option("--exclude", update.exclude, "Glob of ignored files (repeatable)");
    u->add_flag("--write", update.write, "Rewrite the index (and store) in place under a lock");

    AblateOptions ablate;
    auto* a = app.add_subcommand("ablate", "Apply a structural ablation variant");
    a->add_option("index", ablate.index, "Index file or '-'")->required();
    a->add_option("--variant", ablate.variant, "wo-ABCDE, wo-ABCD, wo-R, wo-S, wo-FRAS or NL-rewrite")->required();
    a->add_flag("--tables", ablate.tables, "Also ablate table entries");
    a->add_flag("--report", ablate.report, "Print token accounting instead of the ablated index");
    a->add_option("--estimator", ablate.estimator, "chars4 or words13 (default: $AOCI_ESTIMATOR or chars4)");

    StatsOptions stats;
    auto* st = app.add_subcommand("stats", "Summarize an index");
    st->add_option("index", stats.index, "Index file or '-'")->required();
    st->add_option("--loc", stats.loc, "Repository LOC for the compression ratio")->check(CLI::NonNegativeNumber);
    st->add_flag("--json", stats.json, "Machine-readable output");
    st->add_option("--estimator", stats.estimator, "chars4 or words13 (default: $AOCI_ESTIMATOR or chars4)");

    ScoreOptions score;
    auto* sc = app.add_subcommand("score", "Score Where or What answers");
    sc->require_subcommand(1);
    auto* where = sc->add_subcommand("where", "Exact path match, one path per line");
    auto* what = sc->add_subcommand("what", "Entity-set F1, one entity per line");
    for (auto* sub : {where, what}) {
        sub->add_option("--pred", score.pred, "Predictions file or '-'")->required();
        sub->add_option("--truth", score.truth, "Ground-truth file or '-'")->required();
    }

    DecodeOptions decode;
    auto* d = app.add_subcommand("decode-tag", "Explain a tag under an index's dictionary");
    d->add_option("tag", decode.tag, "Code or table tag, brackets optional")->required();
    d->add_option("--index", decode.index, "Index whose dictionary to use")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsage;
    }

    try {
        if (c->parsed())
            return cmd_check(check, in, out);
        if (f->parsed())
            return cmd_fmt(fmt, in, out, err);
        if (s->parsed())
            return cmd_scaffold(scaffold, in, out, err);
        if (u->parsed())
            return cmd_update(update, in, out, err);
        if (a->parsed())
            return cmd_ablate(ablate, in, out);
        if (st->parsed())
            return cmd_stats(stats, in, out);
        if (where->parsed())
            return cmd_score_where(score, in, out);
        if (what->parsed())
            return cmd_score_what(score, in, out);
        if (d->parsed())
            return cmd_decode_tag(decode, in, out, err);
        err << app.help();
        return kUsage;
    } catch (const Failure& e) {
        err << e.what() << '\n';
        return e.code;
    } catch (const ParseError& e) {
        err << format_issue(parse_issue("<input>", e)) << '\n';
        return kValidation;
    } catch (const IoError& e) {
        err << "error io: " << e.what() << '\n';
        return kIo;
    } catch (const fs::filesystem_error& e) {
        err << "error io: " << e.what() << '\n';
        return kIo;
    } catch (const PlanMismatch& e) {
        err << "error plan: " << e.what() << '\n';
        return kValidation;
    } catch (const InvalidIndex& e) {
        err << "error index: " << e.what() << '\n';
        return kValidation;
    } catch (const ConfigError& e) {
        err << "error config: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        err << "error usage: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    }
}

} // namespace aoci::cli
