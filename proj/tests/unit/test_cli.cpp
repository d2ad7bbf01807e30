#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "abductor/cli/cli.hpp"
#include "abductor/logic/parser.hpp"
#include "abductor/meta/learner.hpp"
#include "abductor/meta/task.hpp"

using namespace abductor;
using namespace abductor::cli;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::string kFixtures = ABDUCTOR_FIXTURE_DIR;
const std::string kPrompts = ABDUCTOR_PROMPT_DIR;

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args, std::map<std::string, std::string> env = {}) {
    args.insert(args.begin(), "abductor");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    const auto lookup = [&env](const char* name) -> const char* {
        const auto it = env.find(name);
        return it == env.end() ? nullptr : it->second.c_str();
    };
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err, lookup);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        static int n = 0;
        path = fs::temp_directory_path() / ("abductor_cli_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

json read_json(const std::string& path) {
    std::ifstream in(path);
    return json::parse(in);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream o(path);
    o << text;
}

json stripped(json r) {
    r.erase("timings");
    for (auto& e : r["transcript"]) {
        e.erase("ts_ms");
        e.erase("latency_ms");
    }
    return r;
}

std::set<std::string> flags_in(const std::string& text) {
    static const std::regex flag_re(R"(--[a-z][a-z0-9-]*)");
    std::set<std::string> out;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), flag_re); it != std::sregex_iterator(); ++it) {
        out.insert(it->str());
    }
    return out;
}

const std::string golden_task = kFixtures + "/golden_dog/task.json";
const std::string golden_fixture = "scripted:" + kFixtures + "/golden_dog/fixture.json";

} // namespace

TEST_CASE("help lists every flag and every listed flag is accepted") {
    const auto top = invoke({"--help"});
    CHECK(top.code == kOk);
    const auto listed = flags_in(top.out);
    for (const auto& k : CliConfig::keys()) {
        std::string flag = "--" + k;
        std::replace(flag.begin(), flag.end(), '_', '-');
        CHECK_MESSAGE(listed.count(flag) == 1, flag);
    }
    for (const char* f : {"--proposer", "--record", "--trace", "--out", "--rates", "--rule-rates", "--trials", "--n-pos",
                          "--n-neg", "--holdout", "--reflection-arms", "--arc-dir", "--out-dir", "--dedupe", "--depth",
                          "--config"}) {
        CHECK_MESSAGE(listed.count(f) == 1, f);
    }
    // every flag a subcommand's own help shows is also in the top-level help, and is known to the parser
    std::istringstream no_input;
    auto* old = std::cin.rdbuf(no_input.rdbuf());
    for (const char* sub : {"learn", "run", "bench", "abstract", "prove", "report"}) {
        const auto h = invoke({sub, "--help"});
        CHECK(h.code == kOk);
        for (const auto& f : flags_in(h.out)) {
            CHECK_MESSAGE(listed.count(f) == 1, sub << " " << f);
            const auto r = invoke({sub, f});
            CHECK_MESSAGE(r.err.find("not expected") == std::string::npos, sub << " " << f);
        }
    }
    std::cin.rdbuf(old);
    CHECK(invoke({"run", "--no-such-flag"}).code == kUsage);
    CHECK(invoke({}).code == kUsage);
}

TEST_CASE("learn prints the oracle's minimal hypotheses") {
    const auto bundle = kFixtures + "/bundles/liked";
    const auto r = invoke({"learn", bundle});
    CHECK(r.code == kOk);
    const auto task = meta::load_task_bundle(bundle);
    auto oracle = meta::enumerate_bruteforce(task, 2);
    REQUIRE_FALSE(oracle.empty());
    const auto min_size = std::min_element(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
                              return a.size() < b.size();
                          })->size();
    std::erase_if(oracle, [&](const auto& h) { return h.size() != min_size; });
    std::string want;
    for (std::size_t i = 0; i < oracle.size(); ++i) {
        want += i > 0 ? "\n" : "";
        for (const auto& c : oracle[i].clauses) {
            want += logic::to_string(c) + "\n";
        }
    }
    CHECK(r.out == want);
    CHECK(r.out == "liked(A,B) :- golden(A), cat(B).\n");
}

TEST_CASE("learn exit codes") {
    const auto bad = invoke({"learn", kFixtures + "/bundles/contradictory"});
    CHECK(bad.code == kUsage);
    CHECK(bad.err.find("both a positive and a negative") != std::string::npos);
    CHECK(invoke({"learn", kFixtures + "/bundles/missing"}).code == kUsage);
    const auto slow = invoke({"learn", kFixtures + "/bundles/slow", "--wall-time", "0.001s"});
    CHECK(slow.code == kTimeout);
    CHECK(slow.out.rfind("timeout", 0) == 0);
    CHECK(invoke({"learn", kFixtures + "/bundles/liked", "--max-clauses", "x"}).code == kUsage);

    TempDir d;
    for (const char* f : {"bk.pl", "metarules.txt"}) {
        fs::copy_file(kFixtures + "/bundles/liked/" + f, d / f);
    }
    spit(d / "pos.pl", "liked(rex, tom).\nliked(bo, jer).\n");
    spit(d / "neg.pl", "liked(max, kit).\n");
    const auto none = invoke({"learn", d.path.string()});
    CHECK(none.code == kNoHypothesis);
    CHECK(none.out == "no hypothesis\n");
    spit(d / "pos.pl", "liked(bo, tom\n");
    const auto syntax = invoke({"learn", d.path.string()});
    CHECK(syntax.code == kUsage);
    CHECK(syntax.err.find("pos.pl") != std::string::npos);
}

TEST_CASE("run writes a report and replays from its own recording") {
    TempDir d;
    const auto r = invoke({"run", golden_task, "--proposer", golden_fixture, "--out", d / "r1.json", "--record",
                        d / "rec.json", "--trace", d / "t.jsonl"});
    CHECK(r.code == kOk);
    const auto rep = read_json(d / "r1.json");
    CHECK(rep["outcome"] == "rule");
    CHECK(rep["induced"]["rule"] == "target(A) :- fur_golden_dog(A), play_together_dog_cat(A).");
    CHECK(rep["reflection_trace"].empty());
    CHECK(slurp(d / "t.jsonl").empty());
    CHECK(rep["config"]["alpha"] == 0.75);

    const auto again = invoke({"run", golden_task, "--proposer", "scripted:" + (d / "rec.json"), "--out", d / "r2.json"});
    CHECK(again.code == kOk);
    CHECK(stripped(read_json(d / "r2.json")).dump() == stripped(rep).dump());
    for (const auto& e : fs::directory_iterator(d.path)) {
        CHECK(e.path().string().find(".tmp.") == std::string::npos);
    }
}

TEST_CASE("no-ilp on the contradiction fixture emits the hallucinated proposal") {
    TempDir d;
    const auto task = kFixtures + "/contradiction/task.json";
    const auto fixture = "scripted:" + kFixtures + "/contradiction/fixture.json";
    const auto base = invoke({"run", task, "--proposer", fixture, "--mode", "no-ilp", "--out", d / "b.json"});
    CHECK(base.code == kOk);
    const auto b = read_json(d / "b.json");
    CHECK(b["status"] == "baseline");
    CHECK(b["induced"]["rule"] == "target(X) :- color_red(o1).");

    const auto ilp = invoke({"run", task, "--proposer", fixture, "--out", d / "i.json", "--trace", d / "t.jsonl"});
    CHECK(ilp.code == kReflectionExhausted);
    const auto i = read_json(d / "i.json");
    CHECK(i["status"] == "reflection-exhausted");
    const auto lines = slurp(d / "t.jsonl");
    CHECK(static_cast<std::size_t>(std::count(lines.begin(), lines.end(), '\n')) == i["reflection_trace"].size());

    const auto rep = invoke({"report", d / "i.json"});
    CHECK(rep.code == kOk);
    CHECK(rep.out.find("reflection-exhausted") != std::string::npos);
    const auto tr = invoke({"report", d / "t.jsonl"});
    CHECK(tr.code == kOk);
    CHECK(tr.out.find(std::to_string(i["reflection_trace"].size()) + " events") != std::string::npos);
    spit(d / "junk.txt", "not json\n");
    CHECK(invoke({"report", d / "junk.txt"}).code == kUsage);
}

TEST_CASE("run failure exit codes") {
    TempDir d;
    spit(d / "short.json", R"({"policy": "error", "responses": {"propose_criteria": [{"criteria": [{"token": "fur"}]}]}})");
    const auto ex = invoke({"run", golden_task, "--proposer", "scripted:" + (d / "short.json"), "--out", d / "r.json"});
    CHECK(ex.code == kUsage);
    CHECK(ex.err.find("no fixture entry") != std::string::npos);
    const auto live = invoke({"run", golden_task, "--proposer", "live", "--prompt-dir", kPrompts, "--base-url",
                           "http://127.0.0.1:9/v1", "--max-retries", "0", "--out", d / "r.json"});
    CHECK(live.code == kTransport);
    CHECK(invoke({"run", golden_task, "--proposer", "carrier-pigeon"}).code == kUsage);
    CHECK(invoke({"run", golden_task, "--proposer", "live", "--prompt-dir", d / "none"}).code == kUsage);
}

TEST_CASE("config precedence: defaults, file, flags, env") {
    TempDir d;
    spit(d / "c.json", R"({"alpha": 0.6, "seed": 5})");
    auto alpha_of = [&](std::vector<std::string> extra, std::map<std::string, std::string> env) {
        std::vector<std::string> args = {"run", golden_task, "--proposer", golden_fixture, "--out", d / "r.json"};
        args.insert(args.end(), extra.begin(), extra.end());
        REQUIRE(invoke(args, env).code == kOk);
        const auto c = read_json(d / "r.json")["config"];
        return std::make_pair(c["alpha"].get<double>(), c["seed"].get<std::uint64_t>());
    };
    CHECK(alpha_of({}, {}) == std::make_pair(0.75, std::uint64_t{0}));
    CHECK(alpha_of({"--config", d / "c.json"}, {}) == std::make_pair(0.6, std::uint64_t{5}));
    CHECK(alpha_of({"--config", d / "c.json", "--alpha", "0.7"}, {}) == std::make_pair(0.7, std::uint64_t{5}));
    CHECK(alpha_of({"--config", d / "c.json", "--alpha", "0.7"}, {{"ABDUCTOR_ALPHA", "0.8"}}) ==
          std::make_pair(0.8, std::uint64_t{5}));

    CliConfig c;
    spit(d / "bad.json", R"({"alfa": 1})");
    CHECK_THROWS_AS(c.merge_file(d / "bad.json"), std::invalid_argument);
    spit(d / "nested.json", R"({"alpha": [1]})");
    CHECK_THROWS_AS(c.merge_file(d / "nested.json"), std::invalid_argument);
    c.set("reflection", "off");
    CHECK_FALSE(c.pipeline().reflection);
    c.set("alpha", "1.5");
    CHECK_THROWS_AS(c.pipeline(), std::invalid_argument);
    CHECK(invoke({"run", golden_task, "--proposer", golden_fixture, "--out", d / "r.json"}, {{"ABDUCTOR_ALPHA", "x"}}).code ==
          kUsage);
}

TEST_CASE("durations") {
    using std::chrono::milliseconds;
    CHECK(parse_duration("10s") == milliseconds(10000));
    CHECK(parse_duration("500ms") == milliseconds(500));
    CHECK(parse_duration("2m") == milliseconds(120000));
    CHECK(parse_duration("0.001s") == milliseconds(1));
    CHECK(parse_duration("3") == milliseconds(3000));
    CHECK_THROWS_AS(parse_duration("0.0001s"), std::invalid_argument);
    CHECK_THROWS_AS(parse_duration("-1s"), std::invalid_argument);
    CHECK_THROWS_AS(parse_duration("soon"), std::invalid_argument);
}

TEST_CASE("atomic writes replace whole files") {
    TempDir d;
    write_atomic(d / "sub/x.txt", "first");
    write_atomic(d / "sub/x.txt", "second");
    CHECK(slurp(d / "sub/x.txt") == "second");
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(d.path / "sub")) {
        ++n;
    }
    CHECK(n == 1);
}

TEST_CASE("bench suites") {
    TempDir d;
    CHECK(invoke({"bench", "arc-3d"}).code == kUsage);
    const auto clean = invoke({"bench", "clevr-synth", "--rates", "0,0,0", "--rule-rates", "0,0,0", "--n-neg", "16",
                            "--trials", "6", "--reflection-arms", "on", "--seed", "4", "--out-dir", d / "a"});
    CHECK(clean.code == kOk);
    const auto a = read_json(d / "a/clevr-synth.json");
    REQUIRE(a.size() == 1);
    for (const auto& t : a[0]["tasks"]) {
        CHECK(t["recovered"] == true);
    }

    // paired rows, and the same bytes whatever the thread count
    CHECK(invoke({"bench", "clevr-synth", "--trials", "6", "--out-dir", d / "b"}).code == kOk);
    CHECK(invoke({"bench", "clevr-synth", "--trials", "6", "--jobs", "3", "--out-dir", d / "c"}).code == kOk);
    CHECK(slurp(d / "b/clevr-synth.json") == slurp(d / "c/clevr-synth.json"));
    const auto table = slurp(d / "b/clevr-synth-rectification.tsv");
    for (const char* row : {"Facts (3), reflection on", "Facts (3), reflection off", "Facts (5), reflection on"}) {
        CHECK_MESSAGE(table.find(row) != std::string::npos, row);
    }
    CHECK(invoke({"bench", "clevr-synth", "--rates", "0.5,0.5", "--out-dir", d / "x"}).code == kUsage);

    fs::create_directories(d.path / "arc");
    spit(d / "arc/t1.json", R"({"train":[{"input":[[0,3,0,0]],"output":[[0,3,0,0]]}],"test":[{"input":[[0,5,0,0]],"output":[[0,5,0,0]]}]})");
    const auto g = invoke({"bench", "grid-1d", "--arc-dir", d / "arc", "--out-dir", d / "g"});
    CHECK(g.code == kOk);
    CHECK(read_json(d / "g/grid-1d.json")["mean_hamming"] == 0.0);
    CHECK(invoke({"bench", "grid-1d", "--trials", "8", "--out-dir", d / "h"}).code == kOk);
}

TEST_CASE("abstract and prove") {
    std::istringstream in("liked(X,Y) :- golden(X), cat(Y).\nlikes(A,B) :- red(A), dog(B).\n");
    auto* old = std::cin.rdbuf(in.rdbuf());
    const auto a = invoke({"abstract", "--dedupe"});
    std::cin.rdbuf(old);
    CHECK(a.code == kOk);
    CHECK(a.out == "[[P,Q,R],[P,A,B],[[Q,A],[R,B]]]\n");

    std::istringstream broken("liked(X :- .\n");
    old = std::cin.rdbuf(broken.rdbuf());
    CHECK(invoke({"abstract"}).code == kUsage);
    std::cin.rdbuf(old);

    TempDir d;
    spit(d / "p.pl", "p(a).\nq(X) :- p(X).\n");
    const auto yes = invoke({"prove", d / "p.pl", "q(a)", "--trace"});
    CHECK(yes.code == kOk);
    CHECK(yes.out.rfind("provable", 0) == 0);
    CHECK(invoke({"prove", d / "p.pl", "q(b)"}).out.rfind("not-provable", 0) == 0);
    CHECK(invoke({"prove", d / "p.pl", "q("}).code == kUsage);
}
