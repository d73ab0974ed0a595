#include "aoci/model.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_set>

namespace aoci {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool has_space(std::string_view s) {
    return std::any_of(s.begin(), s.end(), is_space);
}

bool is_trimmed(std::string_view s) {
    return s.empty() || (!is_space(s.front()) && !is_space(s.back()));
}

void check_element_text(std::string_view text, std::string_view what, std::string_view path) {
    auto fail = [&](std::string_view why) {
        throw InvalidIndex(std::string(path) + ": " + std::string(what) + " " + std::string(why));
    };
    if (text.find('|') != std::string_view::npos)
        fail("contains '|'");
    if (text.find('\n') != std::string_view::npos || text.find('\r') != std::string_view::npos)
        fail("spans lines");
    if (!is_trimmed(text))
        fail("has surrounding whitespace");
    if (text == "-")
        fail("is the literal empty sentinel");
}

void check_path_chars(std::string_view path) {
    if (path.empty())
        throw InvalidPath("empty path");
    if (has_space(path))
        throw InvalidPath("path contains whitespace: " + std::string(path));
    for (char c : path) {
        if (c == '[' || c == ']' || c == '|' || c == ':' || c == '\\')
            throw InvalidPath("path contains '" + std::string(1, c) + "': " + std::string(path));
    }
    if (path.front() == '/' || path.front() == '#' || path.front() == '@')
        throw InvalidPath("path must be repo-relative: " + std::string(path));
}

} // namespace

std::string canonical_path(std::string_view raw) {
    if (raw.empty())
        throw InvalidPath("empty path");
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        char ch = c == '\\' ? '/' : c;
        if (ch == '/' && !out.empty() && out.back() == '/')
            continue;
        out.push_back(ch);
    }
    std::size_t start = 0;
    while (out.size() - start >= 2 && out[start] == '.' && out[start + 1] == '/')
        start += 2;
    out.erase(0, start);
    if (out.empty())
        throw InvalidPath("path is empty after normalization: " + std::string(raw));
    return out;
}

std::string strip_extension(std::string_view path) {
    auto slash = path.rfind('/');
    auto base = slash == std::string_view::npos ? 0 : slash + 1;
    auto dot = path.rfind('.');
    if (dot == std::string_view::npos || dot <= base)
        return std::string(path);
    return std::string(path.substr(0, dot));
}

bool is_importance_level(int digit) {
    return std::find(kImportanceScale.begin(), kImportanceScale.end(), digit) != kImportanceScale.end();
}

bool is_valid_code(std::string_view code) {
    if (code.empty())
        return false;
    for (char c : code) {
        if (std::isdigit(static_cast<unsigned char>(c)) || is_space(c))
            return false;
        switch (c) {
        case '[': case ']': case '-': case '|': case ':':
        case ',': case '=': case '+': case '#':
            return false;
        default:
            break;
        }
        if (static_cast<unsigned char>(c) < 0x20 || c == 0x7f)
            return false;
    }
    return true;
}

CodeMap::CodeMap(std::initializer_list<Item> items) {
    for (const auto& [code, label] : items)
        add(code, label);
}

void CodeMap::add(std::string code, std::string label) {
    if (!is_valid_code(code))
        throw InvalidDictionary("invalid code '" + code + "'");
    if (contains(code))
        throw InvalidDictionary("duplicate code '" + code + "'");
    if (label.empty() || label.find(',') != std::string::npos || label.find('\n') != std::string::npos ||
        !is_trimmed(label))
        throw InvalidDictionary("invalid label for code '" + code + "'");
    items_.emplace_back(std::move(code), std::move(label));
}

bool CodeMap::contains(std::string_view code) const {
    return label(code) != nullptr;
}

const std::string* CodeMap::label(std::string_view code) const {
    for (const auto& [c, l] : items_)
        if (c == code)
            return &l;
    return nullptr;
}

bool CodeMap::prefix_free() const {
    for (const auto& [a, la] : items_)
        for (const auto& [b, lb] : items_)
            if (a != b && b.size() > a.size() && b.compare(0, a.size(), a) == 0)
                return false;
    return true;
}

TagDictionary TagDictionary::with_default_scale() {
    TagDictionary d;
    d.dim_c.assign(kImportanceScale.begin(), kImportanceScale.end());
    return d;
}

bool TagDictionary::allows_importance(int digit) const {
    return std::find(dim_c.begin(), dim_c.end(), digit) != dim_c.end();
}

const CodeMap& TagDictionary::table_dim(TableDim dim) const {
    switch (dim) {
    case TableDim::Domain: return table_domain;
    case TableDim::Type: return table_type;
    case TableDim::Scale: return table_scale;
    case TableDim::Feat: return table_feat;
    }
    return table_feat;
}

CodeMap& TagDictionary::table_dim(TableDim dim) {
    return const_cast<CodeMap&>(std::as_const(*this).table_dim(dim));
}

void TagDictionary::validate() const {
    if (dim_c.empty())
        throw InvalidDictionary("dimension C is empty");
    std::set<int> seen;
    for (int d : dim_c) {
        if (!is_importance_level(d))
            throw InvalidDictionary("importance " + std::to_string(d) + " is not on the 9/8/7/5/3/1 scale");
        if (!seen.insert(d).second)
            throw InvalidDictionary("duplicate importance " + std::to_string(d));
    }
    if (dim_e.size() > 4)
        throw InvalidDictionary("dimension E has more than four levels");
    for (const auto& [digit, budget] : budgets) {
        if (!is_importance_level(digit))
            throw InvalidDictionary("budget for unknown importance " + std::to_string(digit));
        if (budget.min_tokens < 0 || budget.min_tokens > budget.max_tokens)
            throw InvalidDictionary("budget min exceeds max for importance " + std::to_string(digit));
    }
    // CodeMap::add already guarantees code validity and per-dimension uniqueness.
}

TokenBudget default_budget(int importance) {
    switch (importance) {
    case 9: return {80, 150};
    case 8: return {70, 130};
    case 7: return {60, 110};
    case 5: return {40, 80};
    case 3: return {20, 40};
    case 1: return {20, 40};
    default: return {0, 0};
    }
}

TokenBudget effective_budget(const TagDictionary& dict, int importance) {
    if (auto it = dict.budgets.find(importance); it != dict.budgets.end())
        return it->second;
    return default_budget(importance);
}

void CodeEntry::validate() const {
    check_path_chars(path);
    if (canonical_path(path) != path)
        throw InvalidPath("path is not canonical: " + path);
    if (tag.has_value() != decoded.has_value())
        throw InvalidIndex(path + ": tag and decoded tag must be present together");
    if (tag && (tag->empty() || has_space(*tag) || tag->find_first_of("[]|:") != std::string::npos))
        throw InvalidIndex(path + ": malformed tag '" + *tag + "'");
    check_element_text(f, "F", path);
    check_element_text(a, "A", path);
    check_element_text(s, "S", path);
    for (const auto& ref : r) {
        if (ref.empty() || ref == "-" || has_space(ref) || ref.find('|') != std::string::npos ||
            ref.find(',') != std::string::npos)
            throw InvalidIndex(path + ": malformed R reference '" + ref + "'");
        if (canonical_path(ref) != ref)
            throw InvalidIndex(path + ": R reference is not canonical '" + ref + "'");
    }
}

bool is_valid_table_name(std::string_view name) {
    if (name.empty())
        return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

void TableEntry::validate() const {
    if (!is_valid_table_name(name))
        throw InvalidIndex("invalid table name '" + name + "'");
    if (fields_text.find('\n') != std::string::npos || fields_text.find('\r') != std::string::npos ||
        !is_trimmed(fields_text) || fields_text == "-")
        throw InvalidIndex(name + ": malformed field description");
    if (tag) {
        for (const auto* code : {&tag->domain, &tag->ttype, &tag->scale})
            if (!is_valid_code(*code))
                throw InvalidIndex(name + ": invalid table code '" + *code + "'");
        for (const auto& feat : tag->features)
            if (!is_valid_code(feat))
                throw InvalidIndex(name + ": invalid feature code '" + feat + "'");
    }
}

Index::Index(Header header, std::vector<CodeEntry> code_entries, std::vector<TableEntry> table_entries)
    : header_(std::move(header)), code_entries_(std::move(code_entries)), table_entries_(std::move(table_entries)) {
    if (header_.version < 1)
        throw InvalidIndex("version must be >= 1");
    header_.dictionary.validate();
    std::unordered_set<std::string_view> paths;
    for (const auto& e : code_entries_) {
        e.validate();
        if (!paths.insert(e.path).second)
            throw InvalidIndex("duplicate code entry path '" + e.path + "'");
    }
    std::unordered_set<std::string_view> names;
    for (const auto& t : table_entries_) {
        t.validate();
        if (!names.insert(t.name).second)
            throw InvalidIndex("duplicate table name '" + t.name + "'");
    }
}

const CodeEntry* Index::find_entry(std::string_view path) const {
    for (const auto& e : code_entries_)
        if (e.path == path)
            return &e;
    return nullptr;
}

const TableEntry* Index::find_table(std::string_view name) const {
    for (const auto& t : table_entries_)
        if (t.name == name)
            return &t;
    return nullptr;
}

void ChangeSet::validate() const {
    std::unordered_set<std::string_view> seen;
    for (const auto& rec : records) {
        if (rec.path.empty())
            throw std::invalid_argument("change record with empty path");
        if (!seen.insert(rec.path).second)
            throw std::invalid_argument("duplicate path in change set: " + rec.path);
        if (rec.status == ChangeStatus::Renamed) {
            if (rec.new_path.empty() || rec.new_path == rec.path)
                throw std::invalid_argument("rename needs two distinct paths: " + rec.path);
            if (!seen.insert(rec.new_path).second)
                throw std::invalid_argument("duplicate path in change set: " + rec.new_path);
        }
    }
}

} // namespace aoci
