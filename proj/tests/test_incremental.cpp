#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "aoci/incremental.hpp"
#include "aoci/validator.hpp"
#include "support.hpp"

using namespace aoci;
using namespace aoci::testing;

namespace {

ChangeSet changes(std::initializer_list<ChangeRecord> records) {
    ChangeSet c;
    c.records = records;
    return c;
}

ChangeRecord modified(const std::string& p) {
    return {ChangeStatus::Modified, p, "", 100};
}

CodeEntry revised(const CodeEntry& e, const std::string& marker) {
    CodeEntry d = e;
    d.s = d.s.empty() ? marker : d.s + " " + marker;
    return d;
}

std::set<std::pair<std::string, std::string>> e2_pairs(const Index& idx) {
    std::set<std::pair<std::string, std::string>> out;
    for (const auto& i : validate_index(idx)) {
        if (i.rule != "E2")
            continue;
        auto q1 = i.message.find('\'');
        auto q2 = i.message.find('\'', q1 + 1);
        out.insert({i.subject, i.message.substr(q1 + 1, q2 - q1 - 1)});
    }
    return out;
}

// Random mixed change set over an index: modifications, deletions,
// renames and additions of fresh paths.
ChangeSet random_changes(Rng& rng, const Index& idx, int k) {
    ChangeSet c;
    std::set<std::string> used;
    std::set<std::string> taken;
    for (const auto& e : idx.code_entries())
        taken.insert(e.path);
    const auto& es = idx.code_entries();
    for (int i = 0; i < k && !es.empty(); ++i) {
        const auto& p = es[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(es.size()) - 1))].path;
        if (used.count(p))
            continue;
        std::string fresh = "new_" + std::to_string(i) + "_" + random_word(rng, "abcdef", 3, 6) + ".go";
        if (taken.count(fresh) || used.count(fresh))
            continue;
        switch (uniform(rng, 0, 3)) {
        case 0: c.records.push_back(modified(p)); break;
        case 1: c.records.push_back({ChangeStatus::Deleted, p, "", 100}); break;
        case 2:
            c.records.push_back({ChangeStatus::Renamed, p, fresh, chance(rng, 0.5) ? 100 : uniform(rng, 50, 99)});
            used.insert(fresh);
            break;
        default:
            c.records.push_back({ChangeStatus::Added, fresh, "", 100});
            used.insert(fresh);
            continue;
        }
        used.insert(p);
    }
    return c;
}

std::map<std::string, CodeEntry> drafts_for(const Index& idx, const UpdatePlan& plan) {
    std::map<std::string, CodeEntry> drafts;
    for (const auto& p : plan.regenerate) {
        CodeEntry d;
        if (const auto* e = idx.find_entry(p)) {
            d = revised(*e, "regenerated");
            for (const auto& rw : plan.ref_rewrites)
                if (rw.host == p)
                    std::replace(d.r.begin(), d.r.end(), rw.old_ref, rw.new_ref);
        }
        d.path = p;
        d.f = "regenerated " + p;
        for (const auto& [from, to] : plan.rename_map)
            if (to == p)
                if (const auto* old = idx.find_entry(from)) {
                    d = revised(*old, "regenerated");
                    d.path = p;
                    // The draft is written after the rename, so its R already
                    // carries the rewritten references.
                    for (const auto& rw : plan.ref_rewrites)
                        if (rw.host == from)
                            std::replace(d.r.begin(), d.r.end(), rw.old_ref, rw.new_ref);
                }
        drafts[p] = d;
    }
    return drafts;
}

} // namespace

TEST_CASE("change listing parsing") {
    CHECK(parse_changeset("M\tsrc/auth.go") == changes({modified("src/auth.go")}));
    CHECK(parse_changeset("R100\tsrc/a.go\tsrc/b.go\n") ==
          changes({{ChangeStatus::Renamed, "src/a.go", "src/b.go", 100}}));
    CHECK(parse_changeset("").empty());
    CHECK(parse_changeset("\n\nA\tx.go\n\nD\ty.go\n").records.size() == 2);
    auto r = parse_changeset("R087\ta.go\tb.go\n");
    CHECK(r.records[0].similarity == 87);

    auto fails_at = [](const std::string& text) {
        try {
            parse_changeset(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        FAIL("expected ParseError for " << text);
        return std::size_t{0};
    };
    CHECK(fails_at("M\ta.go\nX\tb.go\n") == 2);
    CHECK(fails_at("M\n") == 1);
    CHECK(fails_at("R100\ta.go\n") == 1);
    CHECK(fails_at("M\ta.go\nM\ta.go\n") == 2);
    CHECK(fails_at("M a.go\n") == 1);
}

TEST_CASE("change listing round trip") {
    auto c = changes({modified("a.go"), {ChangeStatus::Added, "b.go", "", 100},
                      {ChangeStatus::Deleted, "c.go", "", 100}, {ChangeStatus::Renamed, "d.go", "e.go", 90}});
    auto text = serialize_changeset(c);
    CHECK(text == "M\ta.go\nA\tb.go\nD\tc.go\nR090\td.go\te.go\n");
    CHECK(parse_changeset(text) == c);
}

TEST_CASE("modifying one sample index file regenerates only it") {
    auto plan = plan_update(sample_index(), changes({modified("auth.go")}));
    CHECK(plan.regenerate == std::vector<std::string>{"auth.go"});
    CHECK(plan.remove.empty());
    CHECK(plan.rename_map.empty());
    CHECK(plan.ref_rewrites.empty());
    CHECK(plan.dangling_after.empty());
    CHECK(plan.warnings.empty());
}

TEST_CASE("deleting a referenced file reports the dangling reference") {
    auto idx = sample_index();
    auto plan = plan_update(idx, changes({{ChangeStatus::Deleted, "model/user/user.go", "", 100}}));
    CHECK(plan.remove == std::vector<std::string>{"model/user/user.go"});
    CHECK(plan.dangling_after == std::vector<DanglingRef>{{"auth.go", "model/user"}});
    auto result = apply_update(idx, plan);
    CHECK(e2_pairs(result.index) == std::set<std::pair<std::string, std::string>>{{"auth.go", "model/user"}});
}

TEST_CASE("empty change set gives an empty plan") {
    auto plan = plan_update(sample_index(), ChangeSet{});
    CHECK(plan.empty());
    CHECK(plan.warnings.empty());
    CHECK(apply_update(sample_index(), plan).index == sample_index());
}

TEST_CASE("changes to unindexed files are warnings") {
    auto plan = plan_update(sample_index(), changes({modified("nope.go"), {ChangeStatus::Deleted, "gone.go", "", 100}}));
    CHECK(plan.empty());
    CHECK(plan.warnings.size() == 2);
    auto renamed = plan_update(sample_index(), changes({{ChangeStatus::Renamed, "x.go", "y.go", 100}}));
    CHECK(renamed.regenerate == std::vector<std::string>{"y.go"});
}

TEST_CASE("removing an entry leaves every other line intact") {
    auto idx = sample_index();
    auto before = serialize_index(idx);
    auto plan = plan_update(idx, changes({{ChangeStatus::Deleted, "config.yaml", "", 100}}));
    auto after = serialize_index(apply_update(idx, plan).index);
    auto lines = split_lines(before);
    lines.erase(std::find_if(lines.begin(), lines.end(), [](const std::string& l) { return l.rfind("config.yaml", 0) == 0; }));
    CHECK(split_lines(after) == lines);
}

TEST_CASE("rename rewrites references textually") {
    Header h;
    CodeEntry a{"a.go", {}, {}, "alpha", {}, "", ""};
    CodeEntry c{"c.go", {}, {}, "gamma", {"a.go", "a"}, "", "uses a"};
    Index idx(h, {a, c}, {});
    auto plan = plan_update(idx, changes({{ChangeStatus::Renamed, "a.go", "b.go", 100}}));
    CHECK(plan.rename_map == std::map<std::string, std::string>{{"a.go", "b.go"}});
    CHECK(plan.regenerate.empty());
    CHECK(plan.ref_rewrites.size() == 2);
    auto result = apply_update(idx, plan).index;
    CHECK(serialize_entry(*result.find_entry("c.go")) == "c.go: F:gamma | R:b.go,b | A:- | S:uses a");
    CHECK(serialize_entry(result.code_entries()[0]) == "b.go: F:alpha | R:- | A:- | S:-");
    CHECK(validate_index(result).empty());
}

TEST_CASE("rename onto an existing entry is a plan mismatch") {
    Header h;
    CodeEntry a{"a.go", {}, {}, "alpha", {}, "", ""};
    CodeEntry b{"b.go", {}, {}, "beta", {}, "", ""};
    Index idx(h, {a, b}, {});
    auto plan = plan_update(idx, changes({{ChangeStatus::Renamed, "a.go", "b.go", 100}}));
    CHECK_FALSE(plan.warnings.empty());
    CHECK_THROWS_AS(apply_update(idx, plan), PlanMismatch);
}

TEST_CASE("drafts replace, missing drafts stay pending") {
    auto idx = sample_index();
    auto plan = plan_update(idx, changes({modified("auth.go"), modified("config.yaml"),
                                          {ChangeStatus::Added, "new.go", "", 100}}));
    CodeEntry draft = *idx.find_entry("auth.go");
    draft.s = "rewritten synopsis for the middleware";
    CodeEntry fresh{"new.go", {}, {}, "fresh", {"auth.go"}, "", "x"};
    auto result = apply_update(idx, plan, {{"auth.go", draft}, {"new.go", fresh}});
    CHECK(result.pending == std::vector<std::string>{"config.yaml"});
    CHECK(*result.index.find_entry("auth.go") == draft);
    CHECK(*result.index.find_entry("config.yaml") == *idx.find_entry("config.yaml"));
    CHECK(result.index.code_entries().back() == fresh);

    CodeEntry stray{"model/org/org.go", {}, {}, "x", {}, "", ""};
    CHECK_THROWS_AS(apply_update(idx, plan, {{"model/org/org.go", stray}}), PlanMismatch);
    CHECK_THROWS_AS(apply_update(idx, plan, {{"auth.go", stray}}), PlanMismatch);
}

TEST_CASE("touch count equals the number of modified files") {
    Rng rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        auto idx = random_index(rng, static_cast<std::size_t>(uniform(rng, 50, 200)));
        int k = uniform(rng, 1, 10);
        std::vector<std::string> paths;
        for (const auto& e : idx.code_entries())
            paths.push_back(e.path);
        std::shuffle(paths.begin(), paths.end(), rng);
        ChangeSet c;
        std::map<std::string, CodeEntry> drafts;
        for (int i = 0; i < k; ++i) {
            c.records.push_back(modified(paths[static_cast<std::size_t>(i)]));
            drafts[paths[static_cast<std::size_t>(i)]] =
                revised(*idx.find_entry(paths[static_cast<std::size_t>(i)]), "rev" + std::to_string(trial));
        }
        auto plan = plan_update(idx, c);
        auto result = apply_update(idx, plan, drafts);
        CHECK(result.pending.empty());
        CHECK(changed_lines(serialize_index(idx), serialize_index(result.index)) == k);
    }
}

TEST_CASE("E2 after a full update fires exactly on the planned dangling references") {
    Rng rng(31337);
    for (int trial = 0; trial < 150; ++trial) {
        auto idx = random_index(rng, static_cast<std::size_t>(uniform(rng, 5, 60)));
        REQUIRE(e2_pairs(idx).empty());
        auto c = random_changes(rng, idx, uniform(rng, 1, 8));
        auto plan = plan_update(idx, c);
        auto result = apply_update(idx, plan, drafts_for(idx, plan));
        CHECK(result.pending.empty());
        std::set<std::pair<std::string, std::string>> planned;
        for (const auto& d : plan.dangling_after)
            planned.insert({d.host, d.ref});
        CHECK(e2_pairs(result.index) == planned);
    }
}

TEST_CASE("applying a plan twice equals applying it once") {
    Rng rng(4242);
    for (int trial = 0; trial < 150; ++trial) {
        auto idx = random_index(rng, static_cast<std::size_t>(uniform(rng, 5, 60)));
        auto plan = plan_update(idx, random_changes(rng, idx, uniform(rng, 1, 8)));
        auto drafts = drafts_for(idx, plan);
        auto once = apply_update(idx, plan, drafts).index;
        auto twice = apply_update(once, plan, drafts).index;
        CHECK(serialize_index(twice) == serialize_index(once));
    }
}

TEST_CASE("content digests are SHA-256") {
    CHECK(content_digest("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(content_digest("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("staleness store persistence") {
    StalenessStore store;
    auto idx = sample_index();
    store.refresh("auth.go", "package middleware\n", idx.find_entry("auth.go"));
    store.refresh("b.go", "x", nullptr);
    auto text = store.serialize();
    CHECK(text.rfind("auth.go\t", 0) == 0);
    CHECK(StalenessStore::parse(text) == store);
    CHECK(store.find("auth.go")->entry_digest == content_digest(serialize_entry(*idx.find_entry("auth.go"))));
    CHECK_THROWS_AS(StalenessStore::parse("a.go\tzz\n"), ParseError);
    CHECK_THROWS_AS(StalenessStore::parse("a.go\tabc\tdef\n"), ParseError);
}

TEST_CASE("detect_stale") {
    auto idx = sample_index();
    StalenessStore store;
    std::vector<FileDigest> files;
    for (const auto& e : idx.code_entries()) {
        store.refresh(e.path, "v1 " + e.path, &e);
        files.push_back({e.path, content_digest("v1 " + e.path)});
    }
    CHECK(detect_stale(store, files, idx).empty());

    auto touched = files;
    touched[0].digest = content_digest("v2");
    CHECK(detect_stale(store, touched, idx) == changes({modified("auth.go")}));

    auto fewer = files;
    fewer.erase(fewer.begin() + 2);
    CHECK(detect_stale(store, fewer, idx) == changes({{ChangeStatus::Deleted, "config.yaml", "", 100}}));

    auto more = files;
    more.push_back({"extra.go", content_digest("x")});
    CHECK(detect_stale(store, more, idx) == changes({{ChangeStatus::Added, "extra.go", "", 100}}));
}
