#include "aoci/scaffolder.hpp"

#include "aoci/grammar.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

namespace fs = std::filesystem;

namespace aoci {

namespace {

enum class ImportStyle { Go, Js, Python, C, Generic };

ImportStyle style_for(std::string_view ext) {
    if (ext == "go")
        return ImportStyle::Go;
    if (ext == "js" || ext == "jsx" || ext == "ts" || ext == "tsx" || ext == "mjs" || ext == "cjs")
        return ImportStyle::Js;
    if (ext == "py")
        return ImportStyle::Python;
    if (ext == "c" || ext == "cc" || ext == "cpp" || ext == "cxx" || ext == "h" || ext == "hh" || ext == "hpp")
        return ImportStyle::C;
    return ImportStyle::Generic;
}

std::string extension_of(std::string_view path) {
    auto slash = path.rfind('/');
    auto base = path.substr(slash == std::string_view::npos ? 0 : slash + 1);
    auto dot = base.rfind('.');
    if (dot == std::string_view::npos || dot == 0)
        return {};
    return std::string(base.substr(dot + 1));
}

std::string dirname_of(std::string_view path) {
    auto slash = path.rfind('/');
    return slash == std::string_view::npos ? std::string() : std::string(path.substr(0, slash));
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

// Joins and normalizes "." and ".." segments; nullopt when ".." escapes
// the repository root.
std::optional<std::string> join_normalized(std::string_view dir, std::string_view rel) {
    std::vector<std::string> parts;
    auto push_all = [&](std::string_view s) -> bool {
        std::size_t start = 0;
        while (start <= s.size()) {
            auto slash = s.find('/', start);
            auto seg = s.substr(start, slash == std::string_view::npos ? std::string_view::npos : slash - start);
            if (seg == "..") {
                if (parts.empty())
                    return false;
                parts.pop_back();
            } else if (!seg.empty() && seg != ".") {
                parts.emplace_back(seg);
            }
            if (slash == std::string_view::npos)
                break;
            start = slash + 1;
        }
        return true;
    };
    if (!push_all(dir) || !push_all(rel) || parts.empty())
        return std::nullopt;
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty())
            out += '/';
        out += p;
    }
    return out;
}

ImportPattern make_pattern(const std::string& source, int group) {
    try {
        return {source, std::regex(source, std::regex::ECMAScript), group};
    } catch (const std::regex_error& e) {
        throw ConfigError("invalid import pattern '" + source + "': " + e.what());
    }
}

const std::map<std::string, std::vector<std::string>>& default_import_sources() {
    static const std::map<std::string, std::vector<std::string>> sources = [] {
        std::map<std::string, std::vector<std::string>> m;
        m["go"] = {R"re(^\s*import\s+(?:[\w.]+\s+)?"([^"]+)")re", R"re(^\s*(?:[\w.]+\s+)?"([^"]+)"\s*$)re"};
        std::vector<std::string> js = {R"re(\bfrom\s+['"]([^'"]+)['"])re", R"re(^\s*import\s+['"]([^'"]+)['"])re",
                                       R"re(\brequire\(\s*['"]([^'"]+)['"]\s*\))re",
                                       R"re(\bimport\(\s*['"]([^'"]+)['"]\s*\))re"};
        for (const char* ext : {"js", "jsx", "ts", "tsx", "mjs", "cjs"})
            m[ext] = js;
        m["py"] = {R"re(^\s*from\s+(\.*[\w.]*)\s+import\b)re", R"re(^\s*import\s+([\w.]+))re"};
        for (const char* ext : {"c", "cc", "cpp", "cxx", "h", "hh", "hpp"})
            m[ext] = {R"re(^\s*#\s*include\s*"([^"]+)")re"};
        return m;
    }();
    return sources;
}

void synthesize_dim(CodeMap& dim, const std::vector<std::string>& codes,
                    const std::map<std::string, std::string>& labels = {}) {
    if (!dim.empty())
        return;
    for (const auto& c : codes) {
        if (dim.contains(c))
            continue;
        auto it = labels.find(c);
        dim.add(c, it == labels.end() ? c : it->second);
    }
}

const std::map<std::string, std::string> kScaleLabels = {
    {"T", "Tiny"}, {"S", "Small"}, {"M", "Medium"}, {"L", "Large"}};

void fill_dictionary(ScaffoldRules& rules) {
    std::vector<std::string> layers, modules;
    for (const auto& r : rules.layer_rules)
        layers.push_back(r.code);
    for (const auto& r : rules.module_rules)
        modules.push_back(r.code);
    auto& d = rules.header.dictionary;
    try {
        synthesize_dim(d.dim_a, layers);
        synthesize_dim(d.dim_b, modules);
        synthesize_dim(d.dim_e, {rules.size.codes.begin(), rules.size.codes.end()}, kScaleLabels);
    } catch (const InvalidDictionary& e) {
        throw ConfigError(std::string("rule code is not a valid dictionary code: ") + e.what());
    }
}

} // namespace

const std::string& SizeClasses::classify(std::size_t loc) const {
    for (std::size_t i = 0; i < cutoffs.size(); ++i)
        if (loc < cutoffs[i])
            return codes[i];
    return codes[3];
}

ScaffoldRules ScaffoldRules::defaults() {
    ScaffoldRules rules;
    rules.importance_quantiles = {{0.05, 9}, {0.15, 8}, {0.30, 7}, {0.55, 5}, {0.80, 3}, {1.0, 1}};
    for (const auto& [ext, sources] : default_import_sources())
        for (const auto& s : sources)
            rules.import_extractors[ext].push_back(make_pattern(s, 1));
    rules.header.project = "";
    fill_dictionary(rules);
    return rules;
}

ScaffoldRules ScaffoldRules::parse(std::string_view text) {
    ScaffoldRules rules = defaults();
    rules.header.dictionary.dim_e = CodeMap{};
    std::string section;
    std::string header_text;
    bool saw_header = false;
    bool saw_size = false;
    bool saw_importance = false;
    std::vector<std::pair<std::size_t, std::string>> sizes;
    std::optional<std::string> largest;
    std::set<std::string> replaced_exts;

    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        auto line = trim(raw);
        auto fail = [&](const std::string& why) {
            throw ConfigError("rules line " + std::to_string(line_no) + ": " + why);
        };
        if (line.empty())
            continue;
        if (line.front() == '[' && line.back() == ']') {
            section = std::string(line.substr(1, line.size() - 2));
            if (section == "header")
                saw_header = true;
            else if (section == "size")
                saw_size = true;
            else if (section == "importance") {
                saw_importance = true;
                rules.importance_quantiles.clear();
            } else if (section.rfind("imports.", 0) == 0) {
                auto ext = section.substr(8);
                if (ext.empty())
                    fail("empty extension in [imports.]");
                if (replaced_exts.insert(ext).second)
                    rules.import_extractors[ext].clear();
            } else if (section != "layer" && section != "module") {
                fail("unknown section [" + section + "]");
            }
            continue;
        }
        if (section == "header") {
            header_text += std::string(line) + "\n";
            continue;
        }
        if (line.front() == ';' || line.front() == '#')
            continue;
        if (section.empty())
            fail("entry outside any section");
        auto eq = line.rfind('=');
        if (eq == std::string_view::npos)
            fail("expected 'key = value'");
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            fail("expected 'key = value'");

        if (section == "layer" || section == "module") {
            auto& target = section == "layer" ? rules.layer_rules : rules.module_rules;
            target.push_back({Glob(key), std::string(value)});
        } else if (section == "size") {
            if (key == "*") {
                if (largest)
                    fail("repeated '*' size class");
                largest = std::string(value);
            } else {
                std::size_t n = 0;
                auto [p, ec] = std::from_chars(key.data(), key.data() + key.size(), n);
                if (ec != std::errc() || p != key.data() + key.size())
                    fail("size threshold must be an integer or '*'");
                sizes.emplace_back(n, std::string(value));
            }
        } else if (section == "importance") {
            double bound = 0;
            int digit = 0;
            try {
                std::size_t used = 0;
                bound = std::stod(std::string(key), &used);
                if (used != key.size())
                    throw std::invalid_argument("trailing");
                digit = std::stoi(std::string(value), &used);
                if (used != value.size())
                    throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                fail("expected '<quantile bound> = <digit>'");
            }
            rules.importance_quantiles.push_back({bound, digit});
        } else {
            int group = 0;
            auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), group);
            if (ec != std::errc() || p != value.data() + value.size() || group < 0)
                fail("import pattern needs a capture group number");
            rules.import_extractors[section.substr(8)].push_back(make_pattern(std::string(key), group));
        }
    }

    if (saw_size) {
        if (sizes.size() != 3 || !largest)
            throw ConfigError("[size] needs three '<loc> = code' lines and one '* = code' line");
        for (std::size_t i = 0; i < 3; ++i) {
            rules.size.cutoffs[i] = sizes[i].first;
            rules.size.codes[i] = sizes[i].second;
        }
        rules.size.codes[3] = *largest;
    }
    if (saw_importance && rules.importance_quantiles.empty())
        throw ConfigError("[importance] section is empty");
    if (saw_header) {
        try {
            rules.header = parse_index(header_text + "@CODE\n").header();
        } catch (const ParseError& e) {
            throw ConfigError(std::string("[header]: ") + e.what());
        }
    }
    fill_dictionary(rules);
    rules.validate();
    return rules;
}

void ScaffoldRules::validate() const {
    for (std::size_t i = 1; i < size.cutoffs.size(); ++i)
        if (size.cutoffs[i] <= size.cutoffs[i - 1])
            throw ConfigError("size thresholds must be strictly increasing");
    std::set<std::string> scale_codes(size.codes.begin(), size.codes.end());
    if (scale_codes.size() != 4)
        throw ConfigError("size classes need four distinct codes");
    const auto& d = header.dictionary;
    for (const auto& c : size.codes)
        if (!d.dim_e.contains(c))
            throw ConfigError("size code '" + c + "' is not in dimension E");
    for (const auto& r : layer_rules)
        if (!d.dim_a.contains(r.code))
            throw ConfigError("layer code '" + r.code + "' is not in dimension A");
    for (const auto& r : module_rules)
        if (!d.dim_b.contains(r.code))
            throw ConfigError("module code '" + r.code + "' is not in dimension B");

    if (importance_quantiles.empty())
        throw ConfigError("no importance bands");
    double prev = 0.0;
    int prev_digit = 10;
    for (const auto& band : importance_quantiles) {
        if (!(band.upper > prev))
            throw ConfigError("importance bounds must be strictly increasing and positive");
        if (!is_importance_level(band.digit) || !d.allows_importance(band.digit))
            throw ConfigError("importance digit " + std::to_string(band.digit) + " is not allowed");
        if (band.digit > prev_digit)
            throw ConfigError("importance digits must not increase with the quantile");
        prev = band.upper;
        prev_digit = band.digit;
    }
    if (prev != 1.0)
        throw ConfigError("the last importance bound must be 1.0");
    for (const auto& [ext, patterns] : import_extractors)
        for (const auto& p : patterns)
            if (static_cast<std::size_t>(p.group) > p.re.mark_count())
                throw ConfigError("import pattern '" + p.source + "' has no group " + std::to_string(p.group));
}

int ScaffoldRules::importance_for(double quantile) const {
    for (const auto& band : importance_quantiles)
        if (quantile < band.upper)
            return band.digit;
    return importance_quantiles.back().digit;
}

std::size_t count_lines(std::string_view text) {
    if (text.empty())
        return 0;
    auto n = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
    return text.back() == '\n' ? n : n + 1;
}

namespace {

std::optional<std::string> read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in)
        return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad())
        return std::nullopt;
    return std::move(ss).str();
}

} // namespace

std::vector<ScannedFile> scan_repo(const fs::path& root, const PathFilter& filter, std::vector<std::string>* warnings) {
    std::error_code ec;
    if (!fs::is_directory(root, ec))
        throw IoError("not a readable directory: " + root.string());
    std::vector<ScannedFile> out;
    fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
    if (ec)
        throw IoError("cannot read " + root.string() + ": " + ec.message());
    for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (ec) {
            if (warnings)
                warnings->push_back("scan: " + ec.message());
            ec.clear();
            continue;
        }
        const auto& entry = *it;
        if (entry.is_directory(ec)) {
            if (entry.path().filename() == ".git")
                it.disable_recursion_pending();
            continue;
        }
        if (!entry.is_regular_file(ec))
            continue;
        auto rel = fs::relative(entry.path(), root, ec);
        if (ec) {
            ec.clear();
            continue;
        }
        std::string path;
        try {
            path = canonical_path(rel.generic_string());
        } catch (const InvalidPath&) {
            continue;
        }
        if (!filter.admits(path))
            continue;
        auto text = read_file(entry.path());
        if (!text) {
            if (warnings)
                warnings->push_back("skipped unreadable file " + path);
            continue;
        }
        out.push_back({path, count_lines(*text), extension_of(path)});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    return out;
}

RepoPaths::RepoPaths(const std::vector<std::string>& files) : ordered_(files) {
    for (const auto& f : files) {
        files_.insert(f);
        for (auto pos = f.find('/'); pos != std::string::npos; pos = f.find('/', pos + 1))
            dirs_.insert(f.substr(0, pos));
    }
}

namespace {

std::optional<std::string> resolve_candidate(const std::string& base, ImportStyle style, const RepoPaths& repo) {
    if (repo.has_file(base))
        return base;
    static const char* const kJsExts[] = {".ts", ".tsx", ".js", ".jsx", ".mjs", ".cjs"};
    switch (style) {
    case ImportStyle::Go:
        if (repo.has_file(base + ".go"))
            return base + ".go";
        break;
    case ImportStyle::Js:
        for (const char* ext : kJsExts)
            if (repo.has_file(base + ext))
                return base + ext;
        for (const char* ext : kJsExts)
            if (repo.has_file(base + "/index" + ext))
                return base + "/index" + ext;
        break;
    case ImportStyle::Python:
        if (repo.has_file(base + ".py"))
            return base + ".py";
        break;
    case ImportStyle::C:
    case ImportStyle::Generic:
        break;
    }
    if (repo.has_dir(base))
        return base;
    return std::nullopt;
}

std::optional<std::string> resolve_import(const std::string& from, std::string module, ImportStyle style,
                                          const RepoPaths& repo) {
    if (module.empty())
        return std::nullopt;
    const auto dir = dirname_of(from);
    std::vector<std::string> bases;
    bool relative = false;

    if (style == ImportStyle::Python) {
        std::size_t dots = 0;
        while (dots < module.size() && module[dots] == '.')
            ++dots;
        std::string rest = module.substr(dots);
        std::replace(rest.begin(), rest.end(), '.', '/');
        if (dots > 0) {
            relative = true;
            std::string up;
            for (std::size_t i = 1; i < dots; ++i)
                up += "../";
            if (auto p = join_normalized(dir, up + rest))
                bases.push_back(*p);
        } else {
            module = rest;
        }
    } else if (module.rfind("./", 0) == 0 || module.rfind("../", 0) == 0) {
        relative = true;
        if (auto p = join_normalized(dir, module))
            bases.push_back(*p);
    }

    if (!relative) {
        if (style == ImportStyle::C)
            if (auto p = join_normalized(dir, module))
                bases.push_back(*p);
        // Longest suffix first: "myapp/pkg/jwt" tries itself, then "pkg/jwt", then "jwt".
        std::string_view rest = module;
        while (!rest.empty()) {
            if (auto p = join_normalized("", rest))
                bases.push_back(*p);
            auto slash = rest.find('/');
            if (slash == std::string_view::npos)
                break;
            rest.remove_prefix(slash + 1);
            if (style == ImportStyle::Js || style == ImportStyle::Python)
                break;   // bare package names are external, not module-prefixed
        }
    }

    for (const auto& base : bases) {
        if (auto hit = resolve_candidate(base, style, repo); hit && *hit != from)
            return hit;
    }
    return std::nullopt;
}

} // namespace

std::vector<std::string> extract_relations(const std::string& path, std::string_view file_text, const RepoPaths& repo,
                                           const ScaffoldRules& rules) {
    std::vector<std::string> out;
    if (find_invalid_utf8(file_text) != std::string_view::npos || file_text.find('\0') != std::string_view::npos)
        return out;
    auto ext = extension_of(path);
    auto it = rules.import_extractors.find(ext);
    if (it == rules.import_extractors.end() || it->second.empty())
        return out;
    const auto style = style_for(ext);
    std::set<std::string> seen;

    std::size_t begin = 0;
    while (begin < file_text.size()) {
        auto nl = file_text.find('\n', begin);
        auto end = nl == std::string_view::npos ? file_text.size() : nl;
        std::string line(file_text.substr(begin, end - begin));
        begin = end + 1;
        for (const auto& pattern : it->second) {
            for (std::sregex_iterator m(line.begin(), line.end(), pattern.re), last; m != last; ++m) {
                if (!(*m)[pattern.group].matched)
                    continue;
                auto resolved = resolve_import(path, (*m)[pattern.group].str(), style, repo);
                if (!resolved)
                    continue;
                std::string ref;
                try {
                    ref = canonical_path(*resolved);
                } catch (const InvalidPath&) {
                    continue;
                }
                if (ref.find_first_of(" \t|,") != std::string::npos)
                    continue;
                if (seen.insert(ref).second)
                    out.push_back(std::move(ref));
            }
        }
    }
    return out;
}

std::string detect_api(const std::string& path, std::string_view file_text) {
    static const std::regex kGo(R"(^func\s+(?:\([^)]*\)\s*)?([A-Z]\w*)\s*[\[(])");
    static const std::regex kJs(
        R"(^\s*export\s+(?:default\s+)?(?:async\s+)?(?:function\*?|class|const|let|var|interface|type)\s+([A-Za-z_$][\w$]*))");
    static const std::regex kPy(R"(^(?:async\s+)?(?:def|class)\s+([A-Za-z]\w*))");
    constexpr std::size_t kMaxNames = 6;

    if (find_invalid_utf8(file_text) != std::string_view::npos)
        return {};
    const std::regex* re = nullptr;
    switch (style_for(extension_of(path))) {
    case ImportStyle::Go: re = &kGo; break;
    case ImportStyle::Js: re = &kJs; break;
    case ImportStyle::Python: re = &kPy; break;
    default: return {};
    }
    std::vector<std::string> names;
    std::size_t begin = 0;
    while (begin < file_text.size() && names.size() < kMaxNames) {
        auto nl = file_text.find('\n', begin);
        auto end = nl == std::string_view::npos ? file_text.size() : nl;
        std::string line(file_text.substr(begin, end - begin));
        begin = end + 1;
        std::smatch m;
        if (std::regex_search(line, m, *re)) {
            auto name = m[1].str();
            if (std::find(names.begin(), names.end(), name) == names.end())
                names.push_back(std::move(name));
        }
    }
    std::string out;
    for (const auto& n : names) {
        if (!out.empty())
            out += ',';
        out += n;
    }
    return out;
}

std::vector<double> fan_in_quantiles(const std::vector<std::size_t>& fan_in) {
    std::vector<std::size_t> sorted(fan_in);
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(fan_in.size());
    std::vector<double> out;
    out.reserve(fan_in.size());
    for (auto f : fan_in) {
        auto at_least = static_cast<std::size_t>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), f));
        out.push_back(static_cast<double>(at_least - 1) / n);
    }
    return out;
}

DraftEntry draft_entry(const std::string& path, std::size_t loc, std::vector<std::string> relations,
                       const ScaffoldRules& rules, std::size_t fan_in, double fan_in_quantile, std::string api) {
    DraftEntry d;
    d.loc = loc;
    d.fan_in = fan_in;
    d.entry.path = canonical_path(path);
    d.entry.f = "TODO";
    d.entry.s = "TODO";
    d.entry.a = std::move(api);
    d.entry.r = std::move(relations);

    const GlobRule* layer = nullptr;
    const GlobRule* module = nullptr;
    for (const auto& rule : rules.layer_rules)
        if (rule.glob.matches(d.entry.path)) {
            layer = &rule;
            break;
        }
    for (const auto& rule : rules.module_rules)
        if (rule.glob.matches(d.entry.path)) {
            module = &rule;
            break;
        }
    if (!layer)
        d.notes.push_back("UnclassifiedFile: no layer rule matches");
    if (!module)
        d.notes.push_back("UnclassifiedFile: no module rule matches");
    if (!layer || !module) {
        d.unclassified = true;
        return d;
    }

    DecodedTag tag;
    tag.layer = layer->code;
    tag.module = module->code;
    tag.importance = rules.importance_for(fan_in_quantile);
    tag.scale = rules.size.classify(loc);
    d.notes.push_back("layer '" + layer->glob.pattern() + "' -> " + layer->code);
    d.notes.push_back("module '" + module->glob.pattern() + "' -> " + module->code);
    d.notes.push_back(std::to_string(loc) + " LOC -> " + *tag.scale);
    d.notes.push_back("fan-in " + std::to_string(fan_in) + " -> " + std::to_string(tag.importance));

    auto encoded = encode_tag(tag);
    try {
        if (decode_tag(encoded, rules.header.dictionary) != tag)
            throw TagError(ParseErrorKind::UnknownCode, TagDimension::A, encoded, "decodes differently");
    } catch (const TagError& e) {
        d.notes.push_back("UnclassifiedFile: tag '" + encoded + "' is ambiguous under the dictionary: " + e.what());
        d.unclassified = true;
        return d;
    }
    d.entry.tag = encoded;
    d.entry.decoded = std::move(tag);
    return d;
}

ScaffoldResult scaffold_repo(const fs::path& root, const ScaffoldRules& rules, const PathFilter& filter) {
    ScaffoldResult result;
    auto files = scan_repo(root, filter, &result.warnings);
    std::vector<std::string> paths;
    paths.reserve(files.size());
    for (const auto& f : files)
        paths.push_back(f.path);
    RepoPaths repo(paths);

    std::vector<std::vector<std::string>> relations(files.size());
    std::vector<std::string> apis(files.size());
    for (std::size_t i = 0; i < files.size(); ++i) {
        result.total_loc += files[i].loc;
        auto text = read_file(root / files[i].path);
        if (!text) {
            result.warnings.push_back("skipped unreadable file " + files[i].path);
            continue;
        }
        relations[i] = extract_relations(files[i].path, *text, repo, rules);
        apis[i] = detect_api(files[i].path, *text);
    }

    // Distinct importers per file; a directory reference credits every file under it.
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < paths.size(); ++i)
        position[paths[i]] = i;
    std::vector<std::set<std::size_t>> importers(files.size());
    for (std::size_t i = 0; i < files.size(); ++i) {
        for (const auto& ref : relations[i]) {
            if (auto it = position.find(ref); it != position.end()) {
                if (it->second != i)
                    importers[it->second].insert(i);
                continue;
            }
            auto lo = position.lower_bound(ref + "/");
            for (auto it = lo; it != position.end() && it->first.compare(0, ref.size() + 1, ref + "/") == 0; ++it)
                if (it->second != i)
                    importers[it->second].insert(i);
        }
    }
    std::vector<std::size_t> fan_in(files.size());
    for (std::size_t i = 0; i < files.size(); ++i)
        fan_in[i] = importers[i].size();
    auto quantiles = fan_in_quantiles(fan_in);

    std::vector<CodeEntry> entries;
    for (std::size_t i = 0; i < files.size(); ++i) {
        auto d = draft_entry(files[i].path, files[i].loc, relations[i], rules, fan_in[i], quantiles[i], apis[i]);
        if (d.unclassified)
            result.warnings.push_back("UnclassifiedFile: " + files[i].path + " drafted without a tag");
        entries.push_back(d.entry);
        result.drafts.push_back(std::move(d));
    }
    result.index = Index(rules.header, std::move(entries), {});
    return result;
}

std::string sanitize_pack_name(std::string_view path) {
    std::string out;
    for (char c : path) {
        if (c == '/')
            out += "__";
        else if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_')
            out += c;
        else
            out += '_';
    }
    return out + ".prompt.txt";
}

PromptPackSet emit_prompt_pack(const Index& index, const std::vector<DraftEntry>& drafts, const SourceLoader& load) {
    PromptPackSet set;
    const auto dictionary = serialize_header(index.header());
    for (const auto& d : drafts) {
        const auto* entry = index.find_entry(d.entry.path);
        const CodeEntry& current = entry ? *entry : d.entry;
        auto source = load(current.path);
        if (!source) {
            set.skipped.push_back(current.path);
            continue;
        }
        std::string budget;
        if (current.decoded && !current.decoded->scale_only()) {
            auto b = effective_budget(index.dictionary(), current.decoded->importance);
            budget = "C=" + std::to_string(current.decoded->importance) + ": " + std::to_string(b.min_tokens) + "-" +
                     std::to_string(b.max_tokens) + " tokens for F, R, A and S combined";
        } else {
            auto b = effective_budget(index.dictionary(), 1);
            budget = "untagged: " + std::to_string(b.min_tokens) + "-" + std::to_string(b.max_tokens) +
                     " tokens for F, R, A and S combined";
        }

        std::string text;
        text += "=== DICTIONARY ===\n" + dictionary;
        text += "=== ENTRY ===\n" + serialize_entry(current) + "\n";
        text += "=== BUDGET ===\n" + budget + "\n";
        text += "=== SOURCE ===\n--- " + current.path + " (" + std::to_string(count_lines(*source)) + " lines) ---\n";
        text += *source;
        if (!source->empty() && source->back() != '\n')
            text += '\n';
        text +=
            "=== INSTRUCTIONS ===\n"
            "Replace the TODO placeholders in the ENTRY line and return exactly one line in the same format:\n"
            "path[TAG]: F:<business role> | R:<related files> | A:<exposed APIs> | S:<synopsis>\n"
            "- Keep the path, the tag and the R references unless the source clearly contradicts them.\n"
            "- F: the file's business function in a short phrase.\n"
            "- A: exposed APIs or interfaces, comma-separated, or '-' if none.\n"
            "- S: dense comma-separated keywords for high-entropy design decisions (limits, fallbacks, schemes).\n"
            "- Stay within the BUDGET. Never use '|' inside an element. Use '-' for an empty element.\n";
        set.packs.push_back({current.path, sanitize_pack_name(current.path), std::move(text)});
    }
    return set;
}

SourceLoader file_loader(fs::path root) {
    return [root = std::move(root)](const std::string& path) { return read_file(root / path); };
}

} // namespace aoci
