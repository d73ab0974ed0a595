#pragma once

// Fixtures, random generators and small oracles shared by the test
// executables and the acceptance runner.

#include "aoci/grammar.hpp"
#include "aoci/model.hpp"
#include "aoci/validator.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#ifndef AOCI_FIXTURE_DIR
#error "AOCI_FIXTURE_DIR must point at tests/fixtures"
#endif

namespace aoci::testing {

using Rng = std::mt19937_64;

inline int uniform(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline bool chance(Rng& rng, double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

template <class T>
const T& pick(Rng& rng, const std::vector<T>& items) {
    return items[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(items.size()) - 1))];
}

inline std::string fixture_path(const std::string& name) {
    return std::string(AOCI_FIXTURE_DIR) + "/" + name;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

inline void write_file(const std::filesystem::path& path, std::string_view text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

inline Index sample_index() {
    return parse_index(read_file(fixture_path("sample.aoci")));
}

inline TagDictionary reference_dictionary() {
    return sample_index().dictionary();
}

inline std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos)
            nl = text.size();
        out.emplace_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return out;
}

/// Positions at which two equally long line lists differ; -1 when the
/// lengths differ.
inline long changed_lines(std::string_view a, std::string_view b) {
    auto la = split_lines(a);
    auto lb = split_lines(b);
    if (la.size() != lb.size())
        return -1;
    long n = 0;
    for (std::size_t i = 0; i < la.size(); ++i)
        n += la[i] != lb[i];
    return n;
}

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = std::filesystem::temp_directory_path() /
                ("aoci_test_" + std::to_string(stamp) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

// ---- random generators ------------------------------------------------------

inline std::string random_word(Rng& rng, const std::string& alphabet, int min_len, int max_len) {
    std::string w;
    int n = uniform(rng, min_len, max_len);
    for (int i = 0; i < n; ++i)
        w += alphabet[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(alphabet.size()) - 1))];
    return w;
}

/// Free text legal inside an F/A/S element or header value: no '|', no
/// line breaks, trimmed, never the bare "-" sentinel. Includes multi-byte
/// UTF-8 now and then.
inline std::string random_text(Rng& rng, int min_words, int max_words) {
    static const std::string kAlpha = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_/.,;:()'=+*#@-";
    static const std::vector<std::string> kWide = {"\xC3\xA9t\xC3\xA9", "\xE4\xB8\xAD\xE6\x96\x87", "na\xC3\xAFve"};
    int n = uniform(rng, min_words, max_words);
    std::string out;
    for (int i = 0; i < n; ++i) {
        if (!out.empty())
            out += ' ';
        out += chance(rng, 0.05) ? pick(rng, kWide) : random_word(rng, kAlpha, 1, 9);
    }
    if (out == "-")
        out = "x-";
    return out;
}

/// Distinct codes of a fixed length over an alphabet.
inline std::vector<std::string> fixed_codes(Rng& rng, const std::string& alphabet, int length, int count) {
    std::set<std::string> seen;
    std::vector<std::string> out;
    int guard = 0;
    while (static_cast<int>(out.size()) < count && guard++ < 1000) {
        auto code = random_word(rng, alphabet, length, length);
        if (seen.insert(code).second)
            out.push_back(code);
    }
    return out;
}

inline std::string label_for(const std::string& code) {
    return "Label " + code;
}

/// Dictionary whose tags decode unambiguously: fixed-length A and D codes,
/// E codes on an alphabet disjoint from D.
inline TagDictionary random_dictionary(Rng& rng) {
    static const std::string kUpper = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    TagDictionary d;
    for (const auto& c : fixed_codes(rng, kUpper, uniform(rng, 1, 2), uniform(rng, 1, 6)))
        d.dim_a.add(c, label_for(c));
    {
        std::set<std::string> seen;
        int k = uniform(rng, 1, 6);
        while (static_cast<int>(d.dim_b.size()) < k) {
            auto c = random_word(rng, kUpper + "abcxyz", 1, 3);
            if (seen.insert(c).second)
                d.dim_b.add(c, label_for(c));
        }
    }
    std::vector<int> scale(kImportanceScale.begin(), kImportanceScale.end());
    std::shuffle(scale.begin(), scale.end(), rng);
    scale.resize(static_cast<std::size_t>(uniform(rng, 1, 6)));
    d.dim_c = scale;
    for (const auto& c : fixed_codes(rng, "ABCDEFGHIJKLM", uniform(rng, 1, 2), uniform(rng, 0, 5)))
        d.dim_d.add(c, label_for(c));
    for (const auto& c : fixed_codes(rng, "NOPQRSTUVWXYZ", 1, uniform(rng, 0, 4)))
        d.dim_e.add(c, label_for(c));
    for (auto dim : {TableDim::Domain, TableDim::Type, TableDim::Scale, TableDim::Feat})
        for (const auto& c : fixed_codes(rng, kUpper, uniform(rng, 1, 3), uniform(rng, 1, 4)))
            d.table_dim(dim).add(c, label_for(c));
    for (int digit : d.dim_c) {
        if (chance(rng, 0.4)) {
            int lo = uniform(rng, 0, 60);
            d.budgets[digit] = {lo, lo + uniform(rng, 0, 200)};
        }
    }
    return d;
}

inline DecodedTag random_tag(Rng& rng, const TagDictionary& d) {
    auto codes = [](const CodeMap& m) {
        std::vector<std::string> out;
        for (const auto& [code, label] : m)
            out.push_back(code);
        return out;
    };
    DecodedTag t;
    t.layer = pick(rng, codes(d.dim_a));
    t.module = pick(rng, codes(d.dim_b));
    t.importance = pick(rng, d.dim_c);
    if (!d.dim_d.empty()) {
        auto dcodes = codes(d.dim_d);
        int n = uniform(rng, 0, 3);
        for (int i = 0; i < n; ++i)
            t.features.push_back(pick(rng, dcodes));
    }
    if (!d.dim_e.empty() && chance(rng, 0.8))
        t.scale = pick(rng, codes(d.dim_e));
    return t;
}

inline TableTag random_table_tag(Rng& rng, const TagDictionary& d) {
    auto one = [&](const CodeMap& m) { return m.items()[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(m.size()) - 1))].first; };
    TableTag t;
    t.domain = one(d.table_domain);
    t.ttype = one(d.table_type);
    t.scale = one(d.table_scale);
    int n = uniform(rng, 0, 2);
    for (int i = 0; i < n; ++i)
        t.features.push_back(one(d.table_feat));
    return t;
}

inline std::vector<std::string> random_paths(Rng& rng, std::size_t n) {
    static const std::vector<std::string> kExt = {".go", ".ts", ".py", ".yaml", ".cpp", ""};
    static const std::vector<std::string> kDirs = {"api", "core", "model", "pkg", "internal", "web", "svc", "util"};
    std::set<std::string> seen;
    std::vector<std::string> out;
    while (out.size() < n) {
        std::string p;
        int depth = uniform(rng, 0, 3);
        for (int i = 0; i < depth; ++i)
            p += pick(rng, kDirs) + "/";
        p += random_word(rng, "abcdefghijklmnopqrstuvwxyz_0123456789", 1, 8) + pick(rng, kExt);
        if (seen.insert(p).second)
            out.push_back(p);
    }
    return out;
}

/// A reference to `target` in one of the three resolvable forms.
inline std::string random_ref_to(Rng& rng, const std::string& target) {
    switch (uniform(rng, 0, 2)) {
    case 0:
        return target;
    case 1:
        return strip_extension(target);
    default: {
        auto slash = target.rfind('/');
        return slash == std::string::npos ? target : target.substr(0, slash);
    }
    }
}

inline CodeEntry random_entry(Rng& rng, const std::string& path, const std::vector<std::string>& pool,
                              const TagDictionary& d, double tag_rate = 0.8) {
    CodeEntry e;
    e.path = path;
    if (chance(rng, tag_rate)) {
        auto t = random_tag(rng, d);
        e.tag = encode_tag(t);
        e.decoded = t;
    }
    e.f = chance(rng, 0.9) ? random_text(rng, 1, 6) : "";
    if (!pool.empty()) {
        int refs = uniform(rng, 0, 3);
        for (int i = 0; i < refs; ++i) {
            auto ref = random_ref_to(rng, pick(rng, pool));
            if (std::find(e.r.begin(), e.r.end(), ref) == e.r.end())
                e.r.push_back(ref);
        }
    }
    e.a = chance(rng, 0.5) ? random_text(rng, 1, 4) : "";
    e.s = chance(rng, 0.85) ? random_text(rng, 2, 30) : "";
    return e;
}

inline Header random_header(Rng& rng, const TagDictionary& d) {
    Header h;
    h.version = uniform(rng, 1, 3);
    h.project = chance(rng, 0.7) ? random_text(rng, 1, 4) : "";
    int overview = uniform(rng, 0, 2);
    for (int i = 0; i < overview; ++i)
        h.overview.push_back(random_text(rng, 1, 8));
    h.stack = chance(rng, 0.5) ? random_text(rng, 1, 4) : "";
    h.dictionary = d;
    return h;
}

/// A valid index with `n` code entries whose R references all resolve.
inline Index random_index(Rng& rng, std::size_t n, const TagDictionary& d, std::size_t tables = 0,
                          double tag_rate = 0.8) {
    auto paths = random_paths(rng, n);
    std::vector<CodeEntry> entries;
    entries.reserve(n);
    for (const auto& p : paths)
        entries.push_back(random_entry(rng, p, paths, d, tag_rate));
    std::vector<TableEntry> table_entries;
    std::set<std::string> names;
    while (table_entries.size() < tables) {
        auto name = random_word(rng, "abcdefghijklmnopqrstuvwxyz_", 1, 10);
        if (!names.insert(name).second)
            continue;
        TableEntry t;
        t.name = name;
        if (chance(rng, 0.8))
            t.tag = random_table_tag(rng, d);
        t.fields_text = random_text(rng, 1, 12);
        table_entries.push_back(std::move(t));
    }
    return Index(random_header(rng, d), std::move(entries), std::move(table_entries));
}

inline Index random_index(Rng& rng, std::size_t n) {
    return random_index(rng, n, random_dictionary(rng), static_cast<std::size_t>(uniform(rng, 0, 3)));
}

/// Independent token oracle: ceil(code points / 4), counting code points by
/// decoding lead bytes.
inline std::size_t oracle_chars4(std::string_view text) {
    std::size_t cp = 0;
    for (std::size_t i = 0; i < text.size();) {
        auto c = static_cast<unsigned char>(text[i]);
        std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : 4;
        i += len;
        ++cp;
    }
    return cp / 4 + (cp % 4 != 0);
}

inline std::size_t oracle_words13(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::size_t words = 0;
    std::string w;
    while (in >> w)
        ++words;
    return (words * 4) / 3 + ((words * 4) % 3 != 0);
}

/// Writes a synthetic Go repository of n files under root. Each file
/// lives in a package directory and imports a few other packages through
/// the "myapp/" module prefix. Returns the repo-relative paths.
inline std::vector<std::string> write_synthetic_repo(const std::filesystem::path& root, std::size_t n, Rng& rng) {
    static const char* const kDirs[] = {"internal/handler", "internal/service", "internal/repo", "model",
                                        "middleware", "router", "pkg", "config"};
    static const char* const kTopics[] = {"auth", "org", "role", "credit", "user", "billing", "audit", "mail"};
    std::vector<std::string> packages;
    for (const char* d : kDirs)
        for (const char* t : kTopics)
            packages.push_back(std::string(d) + "/" + t);
    std::vector<std::string> paths;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& pkg = pick(rng, packages);
        bool yaml = pkg.rfind("config/", 0) == 0 && chance(rng, 0.5);
        auto path = pkg + "/f" + std::to_string(i) + (yaml ? ".yaml" : ".go");
        std::string text;
        if (yaml) {
            text = "key: value\n";
        } else {
            text = "package " + pkg.substr(pkg.rfind('/') + 1) + "\n\nimport (\n";
            int imports = uniform(rng, 0, 4);
            for (int k = 0; k < imports; ++k)
                text += "    \"myapp/" + pick(rng, packages) + "\"\n";
            text += "    \"github.com/gin-gonic/gin\"\n)\n\nfunc Handle" + std::to_string(i) + "() {}\n";
            int body = uniform(rng, 0, 900);
            for (int k = 0; k < body; ++k)
                text += "// line\n";
        }
        write_file(root / path, text);
        paths.push_back(path);
    }
    std::sort(paths.begin(), paths.end());
    return paths;
}

// Resolvers of `ref` among entry paths.
inline std::size_t resolvers(const std::string& ref, const std::vector<std::string>& paths) {
    return static_cast<std::size_t>(
        std::count_if(paths.begin(), paths.end(), [&](const std::string& p) { return ref_matches(ref, p); }));
}

// Clean index in which every R reference resolves to exactly one entry.
inline Index clean_unique_ref_index(Rng& rng, std::size_t n) {
    auto dict = random_dictionary(rng);
    dict.budgets.clear();
    for (int c : dict.dim_c)
        dict.budgets[c] = {0, 100000};
    auto paths = random_paths(rng, n);
    std::vector<CodeEntry> entries;
    for (const auto& p : paths) {
        auto e = random_entry(rng, p, paths, dict);
        std::vector<std::string> kept;
        for (const auto& r : e.r)
            if (resolvers(r, paths) == 1)
                kept.push_back(r);
        e.r = kept;
        if (e.decoded && e.decoded->importance >= 7 && e.f.empty())
            e.f = "role";
        entries.push_back(std::move(e));
    }
    Header h;
    h.dictionary = dict;
    return Index(h, std::move(entries), {});
}

} // namespace aoci::testing
