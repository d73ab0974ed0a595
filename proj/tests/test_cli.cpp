#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cli.hpp"
#include "aoci/incremental.hpp"
#include "support.hpp"

#include "json.hpp"

using namespace aoci;
using namespace aoci::testing;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

Outcome run_cli(std::vector<std::string> args, const std::string& input = {}) {
    std::istringstream in(input);
    std::ostringstream out, err;
    Outcome o;
    o.code = cli::run(args, in, out, err);
    o.out = out.str();
    o.err = err.str();
    return o;
}

const std::string kSample = fixture_path("sample.aoci");

} // namespace

TEST_CASE("check on the clean fixture is quiet") {
    auto r = run_cli({"check", kSample});
    CHECK(r.code == 0);
    CHECK(r.out.empty());
    CHECK(r.err.empty());
}

TEST_CASE("check reports errors and exits 1") {
    auto text = read_file(kSample);
    auto pos = text.find("model/user/user.go: ");
    auto eol = text.find('\n', pos);
    text.erase(pos, eol - pos + 1);
    auto r = run_cli({"check", "-"}, text);
    CHECK(r.code == 1);
    CHECK(r.out.find("error E2 auth.go") != std::string::npos);

    auto json = run_cli({"check", "-", "--format", "json"}, text);
    CHECK(json.code == 1);
    CHECK(nlohmann::json::parse(json.out)[0]["rule"] == "E2");
}

TEST_CASE("check with warnings only exits 0 unless strict") {
    auto text = read_file(kSample);
    text.replace(text.find("#BUDGET 9:20-200\n"), 17, "");
    auto r = run_cli({"check", "-"}, text);
    CHECK(r.code == 0);
    CHECK(r.out.find("W1") != std::string::npos);
    CHECK(run_cli({"check", "-", "--strict"}, text).code == 1);
}

TEST_CASE("check reports parse errors with a location") {
    auto r = run_cli({"check", "-"}, "#AOCI 1\n@CODE\nbroken line\n");
    CHECK(r.code == 1);
    CHECK(r.out.find(":3:") != std::string::npos);
}

TEST_CASE("check coverage against a file list") {
    TempDir dir;
    write_file(dir.path() / "files.txt", "auth.go\norg_repo.go\nconfig.yaml\npkg/jwt/jwt.go\nmodel/user/user.go\n"
                                         "model/org/org.go\ninternal/config/config.go\nextra.go\n");
    auto r = run_cli({"check", kSample, "--files", (dir.path() / "files.txt").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("W5 extra.go") != std::string::npos);
}

TEST_CASE("fmt") {
    auto canonical = read_file(fixture_path("sample.golden.aoci"));
    auto r = run_cli({"fmt", fixture_path("noncanonical.aoci")});
    CHECK(r.code == 0);
    CHECK(r.out == canonical);
    CHECK(run_cli({"fmt", "--verify", fixture_path("noncanonical.aoci")}).code == 1);
    CHECK(run_cli({"fmt", "--verify", kSample}).code == 0);
    auto twice = run_cli({"fmt", "-"}, r.out);
    CHECK(twice.out == r.out);
}

TEST_CASE("fmt --write rewrites in place") {
    TempDir dir;
    auto path = (dir.path() / "idx.aoci").string();
    write_file(path, read_file(fixture_path("noncanonical.aoci")));
    CHECK(run_cli({"fmt", "--write", path}).code == 0);
    CHECK(read_file(path) == read_file(fixture_path("sample.golden.aoci")));
}

TEST_CASE("usage and I/O errors") {
    CHECK(run_cli({"frobnicate"}).code == 2);
    CHECK(run_cli({}).code == 2);
    CHECK(run_cli({"check", kSample, "--no-such-flag"}).code == 2);
    CHECK(run_cli({"ablate", kSample, "--variant", "wo-XYZ"}).code == 2);
    CHECK(run_cli({"check", "/nonexistent/idx.aoci"}).code == 3);
    CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("ablate") {
    auto r = run_cli({"ablate", kSample, "--variant", "wo-FRAS"});
    CHECK(r.code == 0);
    CHECK(r.out.find("auth.go[WA9JM]: F:- | R:- | A:- | S:-\n") != std::string::npos);
    auto report = run_cli({"ablate", kSample, "--variant", "wo-S", "--report"});
    CHECK(report.code == 0);
    CHECK(report.out.find("wo-S") != std::string::npos);
    auto nl = run_cli({"ablate", kSample, "--variant", "NL-rewrite"});
    CHECK(nl.code == 0);
    CHECK(nl.out.rfind("=== INSTRUCTIONS ===", 0) == 0);
}

TEST_CASE("stats") {
    auto r = run_cli({"stats", kSample, "--json", "--loc", "1000"});
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["entries"]["code"] == 7);
    CHECK(j["tokens"]["total"] == 394);
    CHECK(j["compression_ratio"] == doctest::Approx(0.394));
    auto text = run_cli({"stats", kSample});
    CHECK(text.code == 0);
    CHECK(text.out.find("entries") != std::string::npos);
    CHECK(run_cli({"stats", kSample}).out == text.out);
}

TEST_CASE("score") {
    TempDir dir;
    write_file(dir.path() / "pred", "./src/auth.go\nsrc/a.go\n");
    write_file(dir.path() / "truth", "src/auth.go\nsrc/b.go\n");
    auto where = run_cli({"score", "where", "--pred", (dir.path() / "pred").string(), "--truth",
                          (dir.path() / "truth").string()});
    CHECK(where.code == 0);
    CHECK(where.out == "where 1/2 0.5000\n");

    write_file(dir.path() / "p2", "a\nb\n");
    write_file(dir.path() / "t2", "b\nc\n");
    auto what = run_cli({"score", "what", "--pred", (dir.path() / "p2").string(), "--truth",
                         (dir.path() / "t2").string()});
    CHECK(what.out == "what precision 0.5000 recall 0.5000 f1 0.5000 (matched 1, predicted 2, truth 2)\n");
}

TEST_CASE("decode-tag") {
    auto r = run_cli({"decode-tag", "WA9JM", "--index", kSample});
    CHECK(r.code == 0);
    CHECK(r.out.find("layer      W Middleware") != std::string::npos);
    CHECK(r.out.find("scale      M Medium") != std::string::npos);
    auto table = run_cli({"decode-tag", "[U-M-M-GUID]", "--index", kSample});
    CHECK(table.code == 0);
    CHECK(table.out.find("domain     U User") != std::string::npos);
    auto bad = run_cli({"decode-tag", "W9M", "--index", kSample});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("UnknownCode") != std::string::npos);
}

TEST_CASE("update from a change listing") {
    auto r = run_cli({"update", kSample, "--changes", "-"}, "D\tconfig.yaml\n");
    CHECK(r.code == 0);
    CHECK(r.out.find("config.yaml[") == std::string::npos);
    CHECK(r.out.find("auth.go[WA9JM]") != std::string::npos);

    auto pending = run_cli({"update", kSample, "--changes", "-"}, "M\tauth.go\n");
    CHECK(pending.code == 0);
    CHECK(pending.err.find("pending auth.go") != std::string::npos);
    CHECK(pending.out == read_file(kSample));

    auto dangling = run_cli({"update", kSample, "--changes", "-"}, "D\tmodel/user/user.go\n");
    CHECK(dangling.code == 1);

    CHECK(run_cli({"update", kSample}).code == 2);
    CHECK(run_cli({"update", kSample, "--changes", "-"}, "Q\tx\n").code == 1);
}

TEST_CASE("update with drafts and --write") {
    TempDir dir;
    auto idx = (dir.path() / "idx.aoci").string();
    write_file(idx, read_file(kSample));
    write_file(dir.path() / "drafts" / "auth.txt",
               "auth.go[WA9JM]: F:JWT authentication middleware | R:pkg/jwt,model/user | A:- | S:new synopsis\n");
    auto r = run_cli({"update", idx, "--changes", "-", "--drafts", (dir.path() / "drafts").string(), "--write"},
                     "M\tauth.go\n");
    CHECK(r.code == 0);
    CHECK(r.out.empty());
    auto after = read_file(idx);
    CHECK(changed_lines(read_file(kSample), after) == 1);
    CHECK(after.find("S:new synopsis\n") != std::string::npos);
}

TEST_CASE("update --detect against a staleness store") {
    TempDir dir;
    auto root = dir.path() / "repo";
    write_file(root / "a.go", "package a\n");
    write_file(root / "b.go", "package b\n");
    auto idx = (dir.path() / "idx.aoci").string();
    write_file(idx, "#AOCI 1\n@CODE\na.go: F:alpha | R:- | A:- | S:-\nb.go: F:beta | R:- | A:- | S:-\n");
    auto store = (dir.path() / "store.tsv").string();

    auto seed = run_cli({"update", idx, "--detect", "--store", store, "--root", root.string()});
    CHECK(seed.code == 0);
    CHECK(StalenessStore::parse(read_file(store)).find("a.go"));

    auto quiet = run_cli({"update", idx, "--detect", "--store", store, "--root", root.string()});
    CHECK(quiet.code == 0);
    CHECK(quiet.err.empty());

    write_file(root / "a.go", "package a\n\nfunc A() {}\n");
    std::filesystem::remove(root / "b.go");
    auto stale = run_cli({"update", idx, "--detect", "--store", store, "--root", root.string(), "--write"});
    CHECK(stale.code == 0);
    CHECK(stale.err.find("pending a.go") != std::string::npos);
    CHECK(read_file(idx) == "#AOCI 1\n#DIM C 9,8,7,5,3,1\n@CODE\na.go: F:alpha | R:- | A:- | S:-\n");
}

TEST_CASE("scaffold writes an index and prompt packs") {
    TempDir dir;
    auto root = dir.path() / "repo";
    write_file(root / "middleware" / "auth.go", "package middleware\n\nimport \"myapp/pkg/jwt\"\n");
    write_file(root / "pkg" / "jwt" / "jwt.go", "package jwt\n\nfunc Sign() {}\n");
    auto out = (dir.path() / "idx.aoci").string();
    auto prompts = dir.path() / "prompts";
    auto r = run_cli({"scaffold", root.string(), "--rules", fixture_path("rules.ini"), "--out", out, "--prompts",
                      prompts.string()});
    CHECK(r.code == 0);
    auto text = read_file(out);
    CHECK(text.find("middleware/auth.go[WA") != std::string::npos);
    CHECK(text.find("R:pkg/jwt") != std::string::npos);
    CHECK(std::filesystem::exists(prompts / "middleware__auth.go.prompt.txt"));
    CHECK(run_cli({"check", out, "--root", root.string()}).code == 0);

    auto again = run_cli({"scaffold", root.string(), "--rules", fixture_path("rules.ini")});
    CHECK(again.out == text);
    CHECK(run_cli({"scaffold", (dir.path() / "missing").string(), "--rules", fixture_path("rules.ini")}).code == 3);
    write_file(dir.path() / "bad.ini", "[size]\n300 = T\n100 = S\n800 = M\n* = L\n");
    CHECK(run_cli({"scaffold", root.string(), "--rules", (dir.path() / "bad.ini").string()}).code == 2);
}
