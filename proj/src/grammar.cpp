#include "aoci/grammar.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <optional>
#include <unordered_set>

namespace aoci {

std::string_view to_string(ParseErrorKind kind) {
    switch (kind) {
    case ParseErrorKind::InvalidEncoding: return "InvalidEncoding";
    case ParseErrorKind::MissingVersion: return "MissingVersion";
    case ParseErrorKind::MalformedHeader: return "MalformedHeader";
    case ParseErrorKind::UnknownDirective: return "UnknownDirective";
    case ParseErrorKind::InvalidDictionary: return "InvalidDictionary";
    case ParseErrorKind::MisplacedSection: return "MisplacedSection";
    case ParseErrorKind::MalformedEntry: return "MalformedEntry";
    case ParseErrorKind::InvalidPath: return "InvalidPath";
    case ParseErrorKind::MalformedTag: return "MalformedTag";
    case ParseErrorKind::InvalidImportance: return "InvalidImportance";
    case ParseErrorKind::UnknownCode: return "UnknownCode";
    case ParseErrorKind::MalformedTableTag: return "MalformedTableTag";
    case ParseErrorKind::DuplicateEntry: return "DuplicateEntry";
    }
    return "Unknown";
}

std::string_view to_string(TagDimension dim) {
    switch (dim) {
    case TagDimension::A: return "A";
    case TagDimension::B: return "B";
    case TagDimension::C: return "C";
    case TagDimension::D: return "D";
    case TagDimension::E: return "E";
    case TagDimension::Domain: return "DOMAIN";
    case TagDimension::Type: return "TYPE";
    case TagDimension::Scale: return "SCALE";
    case TagDimension::Feat: return "FEAT";
    }
    return "?";
}

ParseError::ParseError(std::size_t line, std::size_t column, ParseErrorKind kind, std::string message)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " +
                         std::string(to_string(kind)) + ": " + message),
      line_(line), column_(column), kind_(kind), message_(std::move(message)) {}

TagError::TagError(ParseErrorKind kind, TagDimension dim, std::string offending, std::string message)
    : std::invalid_argument(std::move(message)), kind_(kind), dim_(dim), offending_(std::move(offending)) {}

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_blank(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_blank(s.front()))
        s.remove_prefix(1);
    while (!s.empty() && is_blank(s.back()))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

// Longest code in `codes` that `text` starts with (ends with, if from_end).
const std::string* longest_match(const CodeMap& codes, std::string_view text, bool from_end) {
    const std::string* best = nullptr;
    for (const auto& [code, label] : codes) {
        if (code.size() > text.size())
            continue;
        bool hit = from_end ? text.substr(text.size() - code.size()) == code
                            : text.substr(0, code.size()) == code;
        if (hit && (!best || code.size() > best->size()))
            best = &code;
    }
    return best;
}

// Left-to-right greedy longest-match split into D codes. On failure returns
// the offset of the first unparseable byte.
std::optional<std::size_t> greedy_features(std::string_view text, const CodeMap& dim_d,
                                           std::vector<std::string>& out) {
    out.clear();
    std::size_t i = 0;
    while (i < text.size()) {
        const auto* code = longest_match(dim_d, text.substr(i), false);
        if (!code)
            return i;
        out.push_back(*code);
        i += code->size();
    }
    return std::nullopt;
}

} // namespace

DecodedTag decode_tag(std::string_view tag, const TagDictionary& dict) {
    if (tag.empty())
        throw TagError(ParseErrorKind::MalformedTag, TagDimension::C, "", "empty tag");

    std::size_t digit_pos = std::string_view::npos;
    for (std::size_t i = 0; i < tag.size(); ++i) {
        if (!is_digit(tag[i]))
            continue;
        if (digit_pos != std::string_view::npos)
            throw TagError(ParseErrorKind::MalformedTag, TagDimension::C, std::string(tag),
                           "tag '" + std::string(tag) + "' has more than one importance digit")
                .at(i);
        digit_pos = i;
    }
    if (digit_pos == std::string_view::npos)
        throw TagError(ParseErrorKind::MalformedTag, TagDimension::C, std::string(tag),
                       "tag '" + std::string(tag) + "' has no importance digit");

    DecodedTag out;
    out.importance = tag[digit_pos] - '0';
    if (!dict.allows_importance(out.importance))
        throw TagError(ParseErrorKind::InvalidImportance, TagDimension::C, std::string(1, tag[digit_pos]),
                       "importance " + std::to_string(out.importance) + " is not in dimension C")
            .at(digit_pos);

    auto prefix = tag.substr(0, digit_pos);
    const auto* layer = longest_match(dict.dim_a, prefix, false);
    if (!layer)
        throw TagError(ParseErrorKind::UnknownCode, TagDimension::A, std::string(prefix),
                       "no A code matches '" + std::string(prefix) + "'");
    out.layer = *layer;
    auto rest = prefix.substr(layer->size());
    if (!dict.dim_b.contains(rest))
        throw TagError(ParseErrorKind::UnknownCode, TagDimension::B, std::string(rest),
                       rest.empty() ? std::string("missing B code")
                                    : "'" + std::string(rest) + "' is not a B code")
            .at(layer->size());
    out.module = std::string(rest);

    auto suffix = tag.substr(digit_pos + 1);
    const std::size_t suffix_at = digit_pos + 1;
    if (const auto* scale = longest_match(dict.dim_e, suffix, true)) {
        auto middle = suffix.substr(0, suffix.size() - scale->size());
        if (!greedy_features(middle, dict.dim_d, out.features)) {
            out.scale = *scale;
            return out;
        }
    }
    if (auto fail = greedy_features(suffix, dict.dim_d, out.features)) {
        auto bad = suffix.substr(*fail);
        throw TagError(ParseErrorKind::UnknownCode, TagDimension::D, std::string(bad),
                       "cannot decode '" + std::string(bad) + "' as D/E codes")
            .at(suffix_at + *fail);
    }
    return out;
}

DecodedTag decode_entry_tag(std::string_view tag, const TagDictionary& dict) {
    bool has_digit = std::any_of(tag.begin(), tag.end(), is_digit);
    if (!has_digit && dict.dim_e.contains(tag)) {
        DecodedTag out;
        out.scale = std::string(tag);
        return out;
    }
    return decode_tag(tag, dict);
}

std::string encode_tag(const DecodedTag& decoded) {
    if (decoded.scale_only())
        return *decoded.scale;
    std::string out = decoded.layer + decoded.module + std::to_string(decoded.importance);
    for (const auto& f : decoded.features)
        out += f;
    if (decoded.scale)
        out += *decoded.scale;
    return out;
}

TableTag decode_table_tag(std::string_view tag, const TagDictionary& dict) {
    auto parts = split(tag, '-');
    if (parts.size() != 4)
        throw TagError(ParseErrorKind::MalformedTableTag, TagDimension::Domain, std::string(tag),
                       "table tag '" + std::string(tag) + "' needs four dash-separated parts, has " +
                           std::to_string(parts.size()));
    static constexpr TableDim kDims[] = {TableDim::Domain, TableDim::Type, TableDim::Scale};
    static constexpr TagDimension kTagDims[] = {TagDimension::Domain, TagDimension::Type, TagDimension::Scale};
    std::size_t offset = 0;
    std::string* slots[3];
    TableTag out;
    slots[0] = &out.domain;
    slots[1] = &out.ttype;
    slots[2] = &out.scale;
    for (int i = 0; i < 3; ++i) {
        if (!dict.table_dim(kDims[i]).contains(parts[i]))
            throw TagError(ParseErrorKind::UnknownCode, kTagDims[i], std::string(parts[i]),
                           "'" + std::string(parts[i]) + "' is not a " + std::string(to_string(kTagDims[i])) +
                               " code")
                .at(offset);
        *slots[i] = std::string(parts[i]);
        offset += parts[i].size() + 1;
    }
    if (!parts[3].empty()) {
        for (auto feat : split(parts[3], '+')) {
            if (feat.empty())
                throw TagError(ParseErrorKind::MalformedTableTag, TagDimension::Feat, std::string(parts[3]),
                               "empty feature code in '" + std::string(tag) + "'")
                    .at(offset);
            if (!dict.table_feat.contains(feat))
                throw TagError(ParseErrorKind::UnknownCode, TagDimension::Feat, std::string(feat),
                               "'" + std::string(feat) + "' is not a FEAT code")
                    .at(offset);
            out.features.emplace_back(feat);
            offset += feat.size() + 1;
        }
    }
    return out;
}

std::string encode_table_tag(const TableTag& tag) {
    std::string out = tag.domain + "-" + tag.ttype + "-" + tag.scale + "-";
    for (std::size_t i = 0; i < tag.features.size(); ++i) {
        if (i)
            out += '+';
        out += tag.features[i];
    }
    return out;
}

std::size_t find_invalid_utf8(std::string_view text) {
    const auto* p = reinterpret_cast<const unsigned char*>(text.data());
    const std::size_t n = text.size();
    std::size_t i = 0;
    while (i < n) {
        unsigned char c = p[i];
        if (c < 0x80) {
            ++i;
            continue;
        }
        std::size_t len;
        std::uint32_t cp;
        if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return i;
        }
        if (i + len > n)
            return i;
        for (std::size_t k = 1; k < len; ++k) {
            if ((p[i + k] & 0xC0) != 0x80)
                return i;
            cp = (cp << 6) | (p[i + k] & 0x3F);
        }
        static constexpr std::uint32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
        if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
            return i;
        i += len;
    }
    return std::string_view::npos;
}

namespace {

// Error raised while parsing one line; the column is 1-based within it.
struct LineError {
    std::size_t column;
    ParseErrorKind kind;
    std::string message;
};

std::size_t column_of(std::string_view line, std::string_view part) {
    return static_cast<std::size_t>(part.data() - line.data()) + 1;
}

LineError from_tag_error(const TagError& e, std::size_t tag_column) {
    return {tag_column + e.offset(), e.kind(), e.what()};
}

std::optional<int> parse_int(std::string_view s) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
        return std::nullopt;
    return value;
}

// Splits "path[TAG]:" off the front of an entry line. Returns the name, the
// optional tag and the remainder after ':'.
struct EntryHead {
    std::string_view name;
    std::optional<std::string_view> tag;
    std::string_view body;
};

EntryHead split_head(std::string_view line) {
    auto stop = line.find_first_of("[:");
    if (stop == std::string_view::npos)
        throw LineError{line.size() + 1, ParseErrorKind::MalformedEntry, "entry has no ':' after its name"};
    EntryHead head;
    head.name = line.substr(0, stop);
    if (head.name.empty())
        throw LineError{1, ParseErrorKind::MalformedEntry, "entry has an empty name"};
    std::size_t colon = stop;
    if (line[stop] == '[') {
        auto close = line.find(']', stop);
        if (close == std::string_view::npos)
            throw LineError{stop + 1, ParseErrorKind::MalformedEntry, "unterminated '['"};
        head.tag = line.substr(stop + 1, close - stop - 1);
        if (head.tag->empty())
            throw LineError{stop + 2, ParseErrorKind::MalformedTag, "empty tag"};
        colon = close + 1;
        if (colon >= line.size() || line[colon] != ':')
            throw LineError{colon + 1, ParseErrorKind::MalformedEntry, "expected ':' after tag"};
    }
    head.body = line.substr(colon + 1);
    return head;
}

std::string element_value(std::string_view v) {
    v = trim(v);
    if (v == "-")
        return {};
    return std::string(v);
}

CodeEntry parse_code_line(std::string_view line, const TagDictionary& dict) {
    auto head = split_head(line);
    CodeEntry entry;
    try {
        entry.path = canonical_path(head.name);
    } catch (const InvalidPath& e) {
        throw LineError{1, ParseErrorKind::InvalidPath, e.what()};
    }

    auto parts = split(head.body, '|');
    if (parts.size() != 4) {
        std::size_t col = parts.size() > 4 ? column_of(line, parts[4]) - 1 : line.size() + 1;
        throw LineError{col, ParseErrorKind::MalformedEntry,
                        "expected four '|'-separated elements F/R/A/S, found " + std::to_string(parts.size())};
    }
    static constexpr std::string_view kLabels[] = {"F:", "R:", "A:", "S:"};
    std::string_view values[4];
    for (int i = 0; i < 4; ++i) {
        auto part = trim(parts[i]);
        if (part.substr(0, 2) != kLabels[i]) {
            auto col = part.empty() ? column_of(line, parts[i]) : column_of(line, part);
            throw LineError{col, ParseErrorKind::MalformedEntry,
                            "expected element '" + std::string(kLabels[i]) + "'"};
        }
        values[i] = part.substr(2);
    }
    entry.f = element_value(values[0]);
    entry.a = element_value(values[2]);
    entry.s = element_value(values[3]);
    auto refs = trim(values[1]);
    if (!refs.empty() && refs != "-") {
        for (auto ref : split(refs, ',')) {
            auto r = trim(ref);
            if (r.empty())
                throw LineError{column_of(line, ref), ParseErrorKind::MalformedEntry, "empty R reference"};
            if (std::any_of(r.begin(), r.end(), [](char c) { return is_blank(c); }))
                throw LineError{column_of(line, r), ParseErrorKind::MalformedEntry,
                                "R reference contains whitespace"};
            try {
                entry.r.push_back(canonical_path(r));
            } catch (const InvalidPath& e) {
                throw LineError{column_of(line, r), ParseErrorKind::MalformedEntry, e.what()};
            }
        }
    }

    if (head.tag) {
        try {
            entry.decoded = decode_entry_tag(*head.tag, dict);
        } catch (const TagError& e) {
            throw from_tag_error(e, column_of(line, *head.tag));
        }
        entry.tag = std::string(*head.tag);
    }

    try {
        entry.validate();
    } catch (const InvalidPath& e) {
        throw LineError{1, ParseErrorKind::InvalidPath, e.what()};
    } catch (const InvalidIndex& e) {
        throw LineError{1, ParseErrorKind::MalformedEntry, e.what()};
    }
    return entry;
}

TableEntry parse_table_line(std::string_view line, const TagDictionary& dict) {
    auto head = split_head(line);
    TableEntry entry;
    entry.name = std::string(head.name);
    if (!is_valid_table_name(entry.name))
        throw LineError{1, ParseErrorKind::MalformedEntry, "invalid table name '" + entry.name + "'"};
    if (head.tag) {
        try {
            entry.tag = decode_table_tag(*head.tag, dict);
        } catch (const TagError& e) {
            throw from_tag_error(e, column_of(line, *head.tag));
        }
    }
    entry.fields_text = element_value(head.body);
    try {
        entry.validate();
    } catch (const InvalidIndex& e) {
        throw LineError{1, ParseErrorKind::MalformedEntry, e.what()};
    }
    return entry;
}

class Parser {
public:
    Parser(std::string_view text, bool stop_on_first) : text_(text), stop_(stop_on_first) {}

    ParseResult run() {
        std::size_t begin = 0;
        std::size_t line_no = 0;
        while (begin <= text_.size()) {
            auto nl = text_.find('\n', begin);
            std::size_t end = nl == std::string_view::npos ? text_.size() : nl;
            ++line_no;
            auto line = text_.substr(begin, end - begin);
            if (!line.empty() && line.back() == '\r')
                line.remove_suffix(1);
            handle_line(line, line_no, begin);
            if (stop_ && !result_.errors.empty())
                break;
            if (nl == std::string_view::npos)
                break;
            begin = nl + 1;
        }
        if (!(stop_ && !result_.errors.empty()) && section_ == Section::Header)
            finish_header(line_no);
        build();
        return std::move(result_);
    }

private:
    enum class Section { Header, Code, Tables };

    void error(std::size_t line, std::size_t column, ParseErrorKind kind, std::string message) {
        result_.errors.emplace_back(line, std::max<std::size_t>(column, 1), kind, std::move(message));
    }

    void handle_line(std::string_view line, std::size_t line_no, std::size_t offset) {
        if (auto bad = find_invalid_utf8(line); bad != std::string_view::npos) {
            error(line_no, bad + 1, ParseErrorKind::InvalidEncoding, "invalid UTF-8 sequence");
            return;
        }
        if (trim(line).empty())
            return;
        try {
            if (line.front() == '@') {
                handle_marker(trim(line), line_no);
            } else if (section_ == Section::Header) {
                if (line.front() != '#')
                    throw LineError{1, ParseErrorKind::MalformedHeader,
                                    "entry line before '@CODE' or '@TABLES'"};
                handle_directive(line);
            } else if (section_ == Section::Code) {
                auto entry = parse_code_line(line, header_.dictionary);
                if (!paths_.insert(entry.path).second)
                    throw LineError{1, ParseErrorKind::DuplicateEntry, "duplicate code entry '" + entry.path + "'"};
                result_.code_spans.push_back({entry.path, offset, offset + line.size(), line_no});
                code_.push_back(std::move(entry));
            } else {
                auto entry = parse_table_line(line, header_.dictionary);
                if (!names_.insert(entry.name).second)
                    throw LineError{1, ParseErrorKind::DuplicateEntry, "duplicate table entry '" + entry.name + "'"};
                result_.table_spans.push_back({entry.name, offset, offset + line.size(), line_no});
                tables_.push_back(std::move(entry));
            }
        } catch (const LineError& e) {
            error(line_no, std::min(e.column, line.size() + 1), e.kind, e.message);
        }
    }

    void handle_marker(std::string_view marker, std::size_t line_no) {
        Section next;
        if (marker == "@CODE")
            next = Section::Code;
        else if (marker == "@TABLES")
            next = Section::Tables;
        else
            throw LineError{1, ParseErrorKind::UnknownDirective, "unknown section marker '" + std::string(marker) + "'"};
        bool& seen = next == Section::Code ? seen_code_ : seen_tables_;
        if (seen)
            throw LineError{1, ParseErrorKind::MisplacedSection, "section '" + std::string(marker) + "' repeated"};
        seen = true;
        if (section_ == Section::Header)
            finish_header(line_no);
        section_ = next;
    }

    void finish_header(std::size_t line_no) {
        if (!saw_version_)
            error(1, 1, ParseErrorKind::MissingVersion, "missing '#AOCI <version>' directive");
        try {
            header_.dictionary.validate();
        } catch (const InvalidDictionary& e) {
            error(line_no, 1, ParseErrorKind::InvalidDictionary, e.what());
        }
    }

    void handle_directive(std::string_view line) {
        auto name_end = line.find_first_of(" \t");
        auto name = line.substr(0, name_end);
        auto rest = name_end == std::string_view::npos ? std::string_view{} : trim(line.substr(name_end));
        std::size_t rest_col = rest.empty() ? line.size() + 1 : column_of(line, rest);

        if (name == "#AOCI") {
            if (saw_version_)
                throw LineError{1, ParseErrorKind::MalformedHeader, "repeated '#AOCI'"};
            auto v = parse_int(rest);
            if (!v || *v < 1)
                throw LineError{rest_col, ParseErrorKind::MalformedHeader, "version must be an integer >= 1"};
            header_.version = *v;
            saw_version_ = true;
        } else if (name == "#PROJECT") {
            if (saw_project_)
                throw LineError{1, ParseErrorKind::MalformedHeader, "repeated '#PROJECT'"};
            header_.project = std::string(rest);
            saw_project_ = true;
        } else if (name == "#OVERVIEW") {
            header_.overview.emplace_back(rest);
        } else if (name == "#STACK") {
            if (saw_stack_)
                throw LineError{1, ParseErrorKind::MalformedHeader, "repeated '#STACK'"};
            header_.stack = std::string(rest);
            saw_stack_ = true;
        } else if (name == "#DIM") {
            handle_dim(line, rest, rest_col);
        } else if (name == "#TDIM") {
            handle_tdim(line, rest, rest_col);
        } else if (name == "#BUDGET") {
            handle_budget(line, rest, rest_col);
        } else {
            throw LineError{1, ParseErrorKind::UnknownDirective, "unknown directive '" + std::string(name) + "'"};
        }
    }

    static std::pair<std::string_view, std::string_view> split_word(std::string_view rest) {
        auto end = rest.find_first_of(" \t");
        if (end == std::string_view::npos)
            return {rest, {}};
        return {rest.substr(0, end), trim(rest.substr(end))};
    }

    void add_codes(std::string_view line, std::string_view list, CodeMap& target) {
        if (list.empty())
            throw LineError{line.size() + 1, ParseErrorKind::MalformedHeader, "empty code list"};
        for (auto item : split(list, ',')) {
            auto eq = item.find('=');
            if (eq == std::string_view::npos)
                throw LineError{column_of(line, item), ParseErrorKind::MalformedHeader,
                                "expected code=label, got '" + std::string(trim(item)) + "'"};
            auto code = trim(item.substr(0, eq));
            auto label = trim(item.substr(eq + 1));
            try {
                target.add(std::string(code), std::string(label));
            } catch (const InvalidDictionary& e) {
                throw LineError{column_of(line, item), ParseErrorKind::InvalidDictionary, e.what()};
            }
        }
    }

    void handle_dim(std::string_view line, std::string_view rest, std::size_t rest_col) {
        auto [dim, list] = split_word(rest);
        auto& d = header_.dictionary;
        if (dim == "A") {
            add_codes(line, list, d.dim_a);
        } else if (dim == "B") {
            add_codes(line, list, d.dim_b);
        } else if (dim == "D") {
            add_codes(line, list, d.dim_d);
        } else if (dim == "E") {
            add_codes(line, list, d.dim_e);
            if (d.dim_e.size() > 4)
                throw LineError{rest_col, ParseErrorKind::InvalidDictionary, "dimension E has more than four levels"};
        } else if (dim == "C") {
            if (list.empty())
                throw LineError{line.size() + 1, ParseErrorKind::MalformedHeader, "empty importance list"};
            if (!saw_dim_c_) {
                d.dim_c.clear();
                saw_dim_c_ = true;
            }
            for (auto item : split(list, ',')) {
                auto v = parse_int(trim(item));
                if (!v || !is_importance_level(*v))
                    throw LineError{column_of(line, item), ParseErrorKind::InvalidDictionary,
                                    "importance must be one of 9,8,7,5,3,1"};
                if (d.allows_importance(*v))
                    throw LineError{column_of(line, item), ParseErrorKind::InvalidDictionary,
                                    "duplicate importance " + std::to_string(*v)};
                d.dim_c.push_back(*v);
            }
        } else {
            throw LineError{rest_col, ParseErrorKind::MalformedHeader, "unknown dimension '" + std::string(dim) + "'"};
        }
    }

    void handle_tdim(std::string_view line, std::string_view rest, std::size_t rest_col) {
        auto [dim, list] = split_word(rest);
        TableDim which;
        if (dim == "DOMAIN")
            which = TableDim::Domain;
        else if (dim == "TYPE")
            which = TableDim::Type;
        else if (dim == "SCALE")
            which = TableDim::Scale;
        else if (dim == "FEAT")
            which = TableDim::Feat;
        else
            throw LineError{rest_col, ParseErrorKind::MalformedHeader, "unknown table dimension '" + std::string(dim) + "'"};
        add_codes(line, list, header_.dictionary.table_dim(which));
    }

    void handle_budget(std::string_view line, std::string_view rest, std::size_t rest_col) {
        if (rest.empty())
            throw LineError{rest_col, ParseErrorKind::MalformedHeader, "empty budget list"};
        std::size_t pos = 0;
        while (pos < rest.size()) {
            auto end = rest.find_first_of(" \t", pos);
            if (end == std::string_view::npos)
                end = rest.size();
            auto item = rest.substr(pos, end - pos);
            pos = end;
            while (pos < rest.size() && is_blank(rest[pos]))
                ++pos;
            auto col = column_of(line, item);
            auto colon = item.find(':');
            auto dash = item.find('-');
            if (colon == std::string_view::npos || dash == std::string_view::npos || dash < colon)
                throw LineError{col, ParseErrorKind::MalformedHeader, "expected <digit>:<min>-<max>"};
            auto digit = parse_int(item.substr(0, colon));
            auto lo = parse_int(item.substr(colon + 1, dash - colon - 1));
            auto hi = parse_int(item.substr(dash + 1));
            if (!digit || !lo || !hi)
                throw LineError{col, ParseErrorKind::MalformedHeader, "expected <digit>:<min>-<max>"};
            if (!is_importance_level(*digit))
                throw LineError{col, ParseErrorKind::InvalidDictionary, "budget for unknown importance"};
            if (*lo < 0 || *lo > *hi)
                throw LineError{col, ParseErrorKind::InvalidDictionary, "budget min exceeds max"};
            if (!header_.dictionary.budgets.emplace(*digit, TokenBudget{*lo, *hi}).second)
                throw LineError{col, ParseErrorKind::InvalidDictionary, "repeated budget for " + std::to_string(*digit)};
        }
    }

    void build() {
        try {
            result_.index = Index(std::move(header_), std::move(code_), std::move(tables_));
        } catch (const std::exception& e) {
            // Only reachable when lenient parsing kept an inconsistent header.
            error(1, 1, ParseErrorKind::InvalidDictionary, e.what());
        }
    }

    std::string_view text_;
    bool stop_;
    ParseResult result_;
    Section section_ = Section::Header;
    Header header_;
    std::vector<CodeEntry> code_;
    std::vector<TableEntry> tables_;
    std::unordered_set<std::string> paths_;
    std::unordered_set<std::string> names_;
    bool saw_version_ = false;
    bool saw_project_ = false;
    bool saw_stack_ = false;
    bool saw_dim_c_ = false;
    bool seen_code_ = false;
    bool seen_tables_ = false;
};

std::string or_dash(const std::string& s) {
    return s.empty() ? std::string("-") : s;
}

void append_codes(std::string& out, std::string_view directive, std::string_view dim, const CodeMap& codes) {
    if (codes.empty())
        return;
    out += directive;
    out += ' ';
    out += dim;
    out += ' ';
    bool first = true;
    for (const auto& [code, label] : codes) {
        if (!first)
            out += ',';
        first = false;
        out += code;
        out += '=';
        out += label;
    }
    out += '\n';
}

} // namespace

Index parse_index(std::string_view text) {
    auto result = Parser(text, true).run();
    if (!result.errors.empty())
        throw result.errors.front();
    return std::move(result.index);
}

ParseResult parse_index_lenient(std::string_view text) {
    return Parser(text, false).run();
}

CodeEntry parse_code_entry(std::string_view line, const TagDictionary& dict) {
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
    if (auto bad = find_invalid_utf8(line); bad != std::string_view::npos)
        throw ParseError(1, bad + 1, ParseErrorKind::InvalidEncoding, "invalid UTF-8 sequence");
    try {
        return parse_code_line(line, dict);
    } catch (const LineError& e) {
        throw ParseError(1, std::min(std::max<std::size_t>(e.column, 1), line.size() + 1), e.kind, e.message);
    }
}

TableEntry parse_table_entry(std::string_view line, const TagDictionary& dict) {
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
    if (auto bad = find_invalid_utf8(line); bad != std::string_view::npos)
        throw ParseError(1, bad + 1, ParseErrorKind::InvalidEncoding, "invalid UTF-8 sequence");
    try {
        return parse_table_line(line, dict);
    } catch (const LineError& e) {
        throw ParseError(1, std::min(std::max<std::size_t>(e.column, 1), line.size() + 1), e.kind, e.message);
    }
}

std::string serialize_header(const Header& header) {
    std::string out = "#AOCI " + std::to_string(header.version) + "\n";
    if (!header.project.empty())
        out += "#PROJECT " + header.project + "\n";
    for (const auto& line : header.overview)
        out += line.empty() ? std::string("#OVERVIEW\n") : "#OVERVIEW " + line + "\n";
    if (!header.stack.empty())
        out += "#STACK " + header.stack + "\n";
    const auto& d = header.dictionary;
    append_codes(out, "#DIM", "A", d.dim_a);
    append_codes(out, "#DIM", "B", d.dim_b);
    out += "#DIM C ";
    for (std::size_t i = 0; i < d.dim_c.size(); ++i) {
        if (i)
            out += ',';
        out += std::to_string(d.dim_c[i]);
    }
    out += '\n';
    append_codes(out, "#DIM", "D", d.dim_d);
    append_codes(out, "#DIM", "E", d.dim_e);
    append_codes(out, "#TDIM", "DOMAIN", d.table_domain);
    append_codes(out, "#TDIM", "TYPE", d.table_type);
    append_codes(out, "#TDIM", "SCALE", d.table_scale);
    append_codes(out, "#TDIM", "FEAT", d.table_feat);
    if (!d.budgets.empty()) {
        out += "#BUDGET";
        for (const auto& [digit, b] : d.budgets)
            out += " " + std::to_string(digit) + ":" + std::to_string(b.min_tokens) + "-" + std::to_string(b.max_tokens);
        out += '\n';
    }
    return out;
}

std::string serialize_entry(const CodeEntry& entry) {
    std::string out = entry.path;
    if (entry.tag)
        out += "[" + *entry.tag + "]";
    out += ": F:" + or_dash(entry.f) + " | R:";
    if (entry.r.empty()) {
        out += '-';
    } else {
        for (std::size_t i = 0; i < entry.r.size(); ++i) {
            if (i)
                out += ',';
            out += entry.r[i];
        }
    }
    out += " | A:" + or_dash(entry.a) + " | S:" + or_dash(entry.s);
    return out;
}

std::string serialize_table_entry(const TableEntry& entry) {
    std::string out = entry.name;
    if (entry.tag)
        out += "[" + encode_table_tag(*entry.tag) + "]";
    out += ": " + or_dash(entry.fields_text);
    return out;
}

std::string serialize_index(const Index& index) {
    std::string out = serialize_header(index.header());
    out += "@CODE\n";
    for (const auto& e : index.code_entries()) {
        out += serialize_entry(e);
        out += '\n';
    }
    if (!index.table_entries().empty()) {
        out += "@TABLES\n";
        for (const auto& t : index.table_entries()) {
            out += serialize_table_entry(t);
            out += '\n';
        }
    }
    return out;
}

} // namespace aoci
