#include "abductor/meta/task.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "abductor/errors.hpp"
#include "abductor/logic/parser.hpp"

namespace abductor::meta {
namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        throw InvalidTask("cannot read " + p.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

logic::Program read_program(const std::filesystem::path& p) {
    try {
        return logic::parse_program(read_file(p));
    } catch (const SyntaxError& e) {
        throw InvalidTask(p.string() + ": " + e.what());
    }
}

std::vector<logic::Atom> read_examples(const std::filesystem::path& p) {
    std::vector<logic::Atom> out;
    const auto program = read_program(p);
    for (const auto& c : program.clauses()) {
        if (!c.is_fact()) {
            throw InvalidTask(p.string() + ": examples must be facts, got '" + logic::to_string(c) + "'");
        }
        out.push_back(c.head);
    }
    return out;
}

} // namespace

Task Task::make(logic::Program background, std::vector<logic::Atom> positives, std::vector<logic::Atom> negatives,
                std::vector<MetaRule> metarules) {
    if (positives.empty()) {
        throw InvalidTask("a task needs at least one positive example");
    }
    auto target = positives.front().id();
    return make(std::move(background), std::move(positives), std::move(negatives), std::move(metarules),
                std::move(target));
}

Task Task::make(logic::Program background, std::vector<logic::Atom> positives, std::vector<logic::Atom> negatives,
                std::vector<MetaRule> metarules, logic::PredicateId target) {
    if (positives.empty()) {
        throw InvalidTask("a task needs at least one positive example");
    }
    auto check = [&](const logic::Atom& a, const char* kind) {
        if (!a.is_ground()) {
            throw InvalidTask(std::string(kind) + " example '" + logic::to_string(a) + "' is not ground");
        }
        if (a.id() != target) {
            throw InvalidTask(std::string(kind) + " example '" + logic::to_string(a) + "' is not an atom of " +
                              target.str());
        }
    };
    for (const auto& a : positives) {
        check(a, "positive");
    }
    for (const auto& a : negatives) {
        check(a, "negative");
    }
    const std::set<logic::Atom> pos(positives.begin(), positives.end());
    for (const auto& a : negatives) {
        if (pos.count(a) != 0) {
            throw InvalidTask("'" + logic::to_string(a) + "' is both a positive and a negative example");
        }
    }
    Task t;
    t.background_ = std::move(background);
    t.positives_ = std::move(positives);
    t.negatives_ = std::move(negatives);
    t.metarules_ = std::move(metarules);
    t.target_ = std::move(target);
    return t;
}

std::vector<logic::PredicateId> Task::predicate_domain() const {
    std::set<logic::PredicateId> ids{target_};
    for (const auto& c : background_.clauses()) {
        ids.insert(c.head.id());
        for (const auto& b : c.body) {
            ids.insert(b.id());
        }
    }
    return {ids.begin(), ids.end()};
}

Task load_task_bundle(const std::filesystem::path& dir) {
    auto background = read_program(dir / "bk.pl");
    auto positives = read_examples(dir / "pos.pl");
    std::vector<logic::Atom> negatives;
    if (std::filesystem::exists(dir / "neg.pl")) {
        negatives = read_examples(dir / "neg.pl");
    }
    std::vector<MetaRule> metarules;
    try {
        metarules = parse_metarules(read_file(dir / "metarules.txt"));
    } catch (const SyntaxError& e) {
        throw InvalidTask((dir / "metarules.txt").string() + ": " + e.what());
    }
    return Task::make(std::move(background), std::move(positives), std::move(negatives), std::move(metarules));
}

} // namespace abductor::meta
