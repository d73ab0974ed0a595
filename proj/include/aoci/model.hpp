#pragma once

// Shared domain types for AOCI indexes: header, tag dictionary, code and
// table entries, change sets. Everything here is a plain value type; the
// only type that enforces invariants on construction is Index.

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace aoci {

class InvalidPath : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InvalidIndex : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InvalidDictionary : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Normalizes a repo-relative path: '\' -> '/', repeated '/' collapsed,
/// leading "./" stripped. Idempotent. Throws InvalidPath on empty input or
/// when nothing remains after normalization.
std::string canonical_path(std::string_view raw);

/// Path with its final extension removed ("model/user.go" -> "model/user").
/// Dot-files and extension-less paths are returned unchanged.
std::string strip_extension(std::string_view path);

/// The fixed six-level importance scale.
inline constexpr std::array<int, 6> kImportanceScale{9, 8, 7, 5, 3, 1};

bool is_importance_level(int digit);

/// A code allowed inside a tag: nonempty, no digits, whitespace or
/// separator characters.
bool is_valid_code(std::string_view code);

/// Insertion-ordered code -> label map for one dictionary dimension.
class CodeMap {
public:
    using Item = std::pair<std::string, std::string>;

    CodeMap() = default;
    CodeMap(std::initializer_list<Item> items);

    /// Throws InvalidDictionary on a duplicate or malformed code.
    void add(std::string code, std::string label);

    bool contains(std::string_view code) const;
    const std::string* label(std::string_view code) const;

    bool empty() const { return items_.empty(); }
    std::size_t size() const { return items_.size(); }
    const std::vector<Item>& items() const { return items_; }
    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }

    /// True when no code is a proper prefix of another code.
    bool prefix_free() const;

    bool operator==(const CodeMap&) const = default;

private:
    std::vector<Item> items_;
};

struct TokenBudget {
    int min_tokens = 0;
    int max_tokens = 0;
    bool operator==(const TokenBudget&) const = default;
};

enum class TableDim { Domain, Type, Scale, Feat };

struct TagDictionary {
    CodeMap dim_a;               // architectural layer
    CodeMap dim_b;               // business module
    std::vector<int> dim_c;      // allowed importance digits, declaration order
    CodeMap dim_d;               // technical characteristics
    CodeMap dim_e;               // code scale, at most four levels
    CodeMap table_domain;
    CodeMap table_type;
    CodeMap table_scale;
    CodeMap table_feat;
    std::map<int, TokenBudget, std::greater<>> budgets;

    /// Dictionary with dim_c set to the full scale and nothing else.
    static TagDictionary with_default_scale();

    bool allows_importance(int digit) const;
    const CodeMap& table_dim(TableDim dim) const;
    CodeMap& table_dim(TableDim dim);

    /// Throws InvalidDictionary describing the first violated invariant.
    void validate() const;

    bool operator==(const TagDictionary&) const = default;
};

/// Budget used when a dictionary declares none for a digit.
TokenBudget default_budget(int importance);

/// Declared budget if present, otherwise the default table.
TokenBudget effective_budget(const TagDictionary& dict, int importance);

struct DecodedTag {
    std::string layer;
    std::string module;
    int importance = 0;
    std::vector<std::string> features;
    std::optional<std::string> scale;

    /// A bare E code with no A/B/C/D part, as produced by the size-only
    /// ablation. Carries importance 0.
    bool scale_only() const { return layer.empty() && module.empty() && importance == 0 && scale.has_value(); }

    bool operator==(const DecodedTag&) const = default;
};

struct Header {
    int version = 1;
    std::string project;
    std::vector<std::string> overview;
    std::string stack;
    TagDictionary dictionary = TagDictionary::with_default_scale();

    bool operator==(const Header&) const = default;
};

struct CodeEntry {
    std::string path;
    std::optional<std::string> tag;
    std::optional<DecodedTag> decoded;
    std::string f;
    std::vector<std::string> r;
    std::string a;
    std::string s;

    /// Throws InvalidIndex when path, references, element text or the
    /// tag/decoded pairing break the entry invariants.
    void validate() const;

    bool operator==(const CodeEntry&) const = default;
};

struct TableTag {
    std::string domain;
    std::string ttype;
    std::string scale;
    std::vector<std::string> features;

    bool operator==(const TableTag&) const = default;
};

struct TableEntry {
    std::string name;
    std::optional<TableTag> tag;
    std::string fields_text;

    void validate() const;

    bool operator==(const TableEntry&) const = default;
};

bool is_valid_table_name(std::string_view name);

/// A whole index. Construction rejects duplicate code paths and duplicate
/// table names; tag/dictionary consistency is the parser's and the
/// validator's business.
class Index {
public:
    Index() = default;
    Index(Header header, std::vector<CodeEntry> code_entries, std::vector<TableEntry> table_entries);

    const Header& header() const { return header_; }
    const TagDictionary& dictionary() const { return header_.dictionary; }
    const std::vector<CodeEntry>& code_entries() const { return code_entries_; }
    const std::vector<TableEntry>& table_entries() const { return table_entries_; }

    const CodeEntry* find_entry(std::string_view path) const;
    const TableEntry* find_table(std::string_view name) const;

    bool operator==(const Index&) const = default;

private:
    Header header_;
    std::vector<CodeEntry> code_entries_;
    std::vector<TableEntry> table_entries_;
};

enum class ChangeStatus { Added, Modified, Deleted, Renamed };

struct ChangeRecord {
    ChangeStatus status = ChangeStatus::Modified;
    std::string path;
    std::string new_path;   // Renamed only
    int similarity = 100;   // Renamed only; the digits after 'R'

    bool operator==(const ChangeRecord&) const = default;
};

struct ChangeSet {
    std::vector<ChangeRecord> records;

    /// Throws std::invalid_argument on duplicate paths or a degenerate rename.
    void validate() const;
    bool empty() const { return records.empty(); }

    bool operator==(const ChangeSet&) const = default;
};

} // namespace aoci
