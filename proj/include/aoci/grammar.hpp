#pragma once

// Parser, canonical serializer and tag codec for the AOCI index text format.
//
//   #AOCI 1
//   #PROJECT <text>
//   #OVERVIEW <text>            (repeatable)
//   #STACK <text>
//   #DIM A|B|D|E code=label,...
//   #DIM C 9,8,7,...
//   #TDIM DOMAIN|TYPE|SCALE|FEAT code=label,...
//   #BUDGET 9:80-150 8:70-130 ...
//   @CODE
//   path[TAG]: F:<f> | R:<r1>,<r2> | A:<a> | S:<s>
//   @TABLES
//   name[DOMAIN-TYPE-SCALE-FEAT+FEAT]: <field description>

#include "aoci/model.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aoci {

enum class ParseErrorKind {
    InvalidEncoding,
    MissingVersion,
    MalformedHeader,
    UnknownDirective,
    InvalidDictionary,
    MisplacedSection,
    MalformedEntry,
    InvalidPath,
    MalformedTag,
    InvalidImportance,
    UnknownCode,
    MalformedTableTag,
    DuplicateEntry,
};

std::string_view to_string(ParseErrorKind kind);

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::size_t column, ParseErrorKind kind, std::string message);

    std::size_t line() const { return line_; }       // 1-based
    std::size_t column() const { return column_; }   // 1-based
    ParseErrorKind kind() const { return kind_; }
    const std::string& message() const { return message_; }

private:
    std::size_t line_;
    std::size_t column_;
    ParseErrorKind kind_;
    std::string message_;
};

enum class TagDimension { A, B, C, D, E, Domain, Type, Scale, Feat };

std::string_view to_string(TagDimension dim);

/// Tag decode failure. kind() is one of MalformedTag, InvalidImportance,
/// UnknownCode or MalformedTableTag.
class TagError : public std::invalid_argument {
public:
    TagError(ParseErrorKind kind, TagDimension dim, std::string offending, std::string message);

    ParseErrorKind kind() const { return kind_; }
    TagDimension dimension() const { return dim_; }
    const std::string& offending() const { return offending_; }
    // Byte offset of the offending substring inside the tag.
    std::size_t offset() const { return offset_; }
    TagError& at(std::size_t offset) {
        offset_ = offset;
        return *this;
    }

private:
    ParseErrorKind kind_;
    TagDimension dim_;
    std::string offending_;
    std::size_t offset_ = 0;
};

/// Decomposes a concatenated ABCDE tag. The single digit anchors C; the
/// prefix is the longest matching A code followed by exactly one B code;
/// the suffix is an optional trailing E code (longest match) preceded by a
/// greedy run of D codes, retried once without E if that fails.
DecodedTag decode_tag(std::string_view tag, const TagDictionary& dict);

std::string encode_tag(const DecodedTag& decoded);

/// Tag as it may appear on an entry line: either a full ABCDE tag or a
/// digit-free tag equal to a single E code (size-only form).
DecodedTag decode_entry_tag(std::string_view tag, const TagDictionary& dict);

TableTag decode_table_tag(std::string_view tag, const TagDictionary& dict);

std::string encode_table_tag(const TableTag& tag);

/// Byte range of one entry line inside the parsed document.
struct SourceSpan {
    std::string subject;   // code path or table name
    std::size_t begin = 0;
    std::size_t end = 0;   // exclusive, excludes the line terminator
    std::size_t line = 0;  // 1-based
};

struct ParseResult {
    Index index;
    std::vector<ParseError> errors;
    std::vector<SourceSpan> code_spans;
    std::vector<SourceSpan> table_spans;

    bool ok() const { return errors.empty(); }
};

/// Strict parse: throws the first ParseError.
Index parse_index(std::string_view text);

/// Lenient parse: collects every error, skips offending lines and keeps
/// whatever parsed cleanly.
ParseResult parse_index_lenient(std::string_view text);

/// Parses a single code entry line against a dictionary (line number 1 in
/// any error). Used for draft files and tests.
CodeEntry parse_code_entry(std::string_view line, const TagDictionary& dict);

TableEntry parse_table_entry(std::string_view line, const TagDictionary& dict);

std::string serialize_header(const Header& header);
std::string serialize_entry(const CodeEntry& entry);
std::string serialize_table_entry(const TableEntry& entry);

/// Canonical text: header directives, "@CODE", entries, then "@TABLES"
/// and table entries when there are any. LF endings, trailing newline.
std::string serialize_index(const Index& index);

/// Checks that text is well-formed UTF-8; returns the byte offset of the
/// first bad sequence or npos.
std::size_t find_invalid_utf8(std::string_view text);

} // namespace aoci
