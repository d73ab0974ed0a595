#pragma once

// Mechanical half of code-to-index: walk a repository, draft one entry per
// file with tags and R references filled from rules and import statements,
// leave F/S as "TODO" and bundle prompt packs so an external model can
// write the semantic layer.

#include "aoci/model.hpp"
#include "aoci/validator.hpp"

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <regex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace aoci {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GlobRule {
    Glob glob;
    std::string code;
};

struct ImportPattern {
    std::string source;
    std::regex re;
    int group = 1;
};

struct SizeClasses {
    std::array<std::size_t, 3> cutoffs{100, 300, 800};   // exclusive upper LOC bounds
    std::array<std::string, 4> codes{"T", "S", "M", "L"};

    const std::string& classify(std::size_t loc) const;
};

struct ImportanceBand {
    double upper = 1.0;   // cumulative quantile bound, exclusive
    int digit = 1;
};

struct ScaffoldRules {
    std::vector<GlobRule> layer_rules;
    std::vector<GlobRule> module_rules;
    SizeClasses size;
    std::vector<ImportanceBand> importance_quantiles;
    std::map<std::string, std::vector<ImportPattern>> import_extractors;   // extension without '.'
    Header header;

    /// Default size classes, quantile bands and import patterns for Go,
    /// JS/TS, Python and C/C++; no layer or module rules.
    static ScaffoldRules defaults();

    /// Reads the rules file format ([header], [layer], [module], [size],
    /// [importance], [imports.<ext>]). Throws ConfigError.
    static ScaffoldRules parse(std::string_view text);

    /// Throws ConfigError: thresholds not increasing, bands not covering
    /// [0,1], codes missing from the dictionary.
    void validate() const;

    /// Importance digit for a fan-in quantile position in [0,1).
    int importance_for(double quantile) const;
};

struct ScannedFile {
    std::string path;
    std::size_t loc = 0;
    std::string extension;   // without '.', may be empty

    bool operator==(const ScannedFile&) const = default;
};

std::size_t count_lines(std::string_view text);

/// Eligible files under root, repo-relative and sorted. ".git" directories
/// are never entered. Throws IoError when root is not a readable directory;
/// unreadable files are skipped and reported through `warnings`.
std::vector<ScannedFile> scan_repo(const std::filesystem::path& root, const PathFilter& filter = {},
                                   std::vector<std::string>* warnings = nullptr);

/// Lookup structure over repository paths: files plus every directory.
class RepoPaths {
public:
    RepoPaths() = default;
    explicit RepoPaths(const std::vector<std::string>& files);

    bool has_file(const std::string& p) const { return files_.count(p) > 0; }
    bool has_dir(const std::string& p) const { return dirs_.count(p) > 0; }
    const std::vector<std::string>& files() const { return ordered_; }

private:
    std::unordered_set<std::string> files_;
    std::unordered_set<std::string> dirs_;
    std::vector<std::string> ordered_;
};

/// R references for one file from its import statements. Each imported
/// module is mapped to a repo file or directory; unresolvable ones are
/// dropped. Deduplicated, first-occurrence order. Non-UTF-8 text yields [].
std::vector<std::string> extract_relations(const std::string& path, std::string_view file_text, const RepoPaths& repo,
                                           const ScaffoldRules& rules);

struct DraftEntry {
    CodeEntry entry;
    std::size_t loc = 0;
    std::size_t fan_in = 0;
    bool unclassified = false;
    std::vector<std::string> notes;   // which rules fired
};

/// Drafts one entry. `fan_in_quantile` is the file's position in the
/// fan-in ranking (0 = most imported). A file no layer or module rule
/// matches is drafted without a tag and flagged unclassified.
DraftEntry draft_entry(const std::string& path, std::size_t loc, std::vector<std::string> relations,
                       const ScaffoldRules& rules, std::size_t fan_in, double fan_in_quantile,
                       std::string api = {});

/// Quantile position per file: (files with fan-in >= own - 1) / N.
std::vector<double> fan_in_quantiles(const std::vector<std::size_t>& fan_in);

/// Exported names spotted by simple per-language patterns, joined by ','.
std::string detect_api(const std::string& path, std::string_view file_text);

struct ScaffoldResult {
    Index index;
    std::vector<DraftEntry> drafts;
    std::vector<std::string> warnings;
    std::size_t total_loc = 0;
};

ScaffoldResult scaffold_repo(const std::filesystem::path& root, const ScaffoldRules& rules,
                             const PathFilter& filter = {});

struct PromptPack {
    std::string path;        // entry path
    std::string file_name;   // "<sanitized-path>.prompt.txt"
    std::string text;
};

struct PromptPackSet {
    std::vector<PromptPack> packs;
    std::vector<std::string> skipped;
};

using SourceLoader = std::function<std::optional<std::string>(const std::string& path)>;

std::string sanitize_pack_name(std::string_view path);

PromptPackSet emit_prompt_pack(const Index& index, const std::vector<DraftEntry>& drafts, const SourceLoader& load);

/// Loader reading files under root.
SourceLoader file_loader(std::filesystem::path root);

} // namespace aoci
