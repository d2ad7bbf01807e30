#include "abductor/proposal/abstraction.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "abductor/errors.hpp"
#include "abductor/logic/parser.hpp"

namespace abductor::proposal {
namespace {

std::string predicate_var_name(std::size_t i) {
    static constexpr std::string_view letters = "PQRSTUVWXYZ";
    std::string out(1, letters[i % letters.size()]);
    if (i >= letters.size()) {
        out += std::to_string(i / letters.size());
    }
    return out;
}

std::string term_var_name(std::size_t i) {
    static constexpr std::string_view letters = "ABCDEFGHIJKLMNO";
    std::string out(1, letters[i % letters.size()]);
    if (i >= letters.size()) {
        out += std::to_string(i / letters.size());
    }
    return out;
}

// Clause text up to and including a top-level '.', across lines.
std::vector<std::string> split_clauses(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (const char c : text) {
        if (c == '(') {
            ++depth;
        } else if (c == ')') {
            --depth;
        }
        cur += c;
        if (c == '.' && depth <= 0) {
            out.push_back(cur);
            cur.clear();
            depth = 0;
        }
    }
    if (cur.find_first_not_of(" \t\r\n") != std::string::npos) {
        out.push_back(cur);
    }
    return out;
}

std::string trimmed(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

ParsedProposals parse_rule_proposals(std::string_view text, const std::string& source_id) {
    ParsedProposals out;
    // Blank lines separate proposals; fence markers and comments are ignored.
    std::vector<std::string> blocks(1);
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string line(text.substr(start, end - start));
        if (const auto pct = line.find('%'); pct != std::string::npos) {
            line.resize(pct);
        }
        const std::string t = trimmed(line);
        if (t.rfind("```", 0) == 0) {
            // fence line
        } else if (t.empty()) {
            if (!blocks.back().empty()) {
                blocks.emplace_back();
            }
        } else {
            blocks.back() += line;
            blocks.back() += '\n';
        }
        start = end + 1;
    }
    for (const auto& block : blocks) {
        if (trimmed(block).empty()) {
            continue;
        }
        RuleProposal p;
        p.source_text = trimmed(block);
        for (const auto& stmt : split_clauses(block)) {
            const std::string s = trimmed(stmt);
            if (s.empty()) {
                continue;
            }
            try {
                p.clauses.push_back(logic::parse_clause(s));
            } catch (const SyntaxError& e) {
                out.quarantine.push_back({source_id, e.what(), s});
            }
        }
        if (!p.clauses.empty()) {
            out.proposals.push_back(std::move(p));
        }
    }
    return out;
}

meta::MetaRule abstract_rule(const logic::Clause& clause) {
    std::map<logic::PredicateId, std::string> preds;
    std::vector<std::string> signature;
    std::map<std::string, std::string> terms;
    auto pred_var = [&](const logic::Atom& a) {
        auto [it, inserted] = preds.try_emplace(a.id(), std::string());
        if (inserted) {
            it->second = predicate_var_name(preds.size() - 1);
            signature.push_back(it->second);
        }
        return it->second;
    };
    auto term_var = [&](const logic::Term& t) {
        const std::string key = t.is_variable() ? "v:" + t.name : "c:" + logic::to_string(t);
        auto [it, inserted] = terms.try_emplace(key, std::string());
        if (inserted) {
            it->second = term_var_name(terms.size() - 1);
        }
        return it->second;
    };
    auto convert = [&](const logic::Atom& a) {
        meta::MetaAtom m;
        m.predicate_var = pred_var(a);
        for (const auto& t : a.args) {
            m.term_vars.push_back(term_var(t));
        }
        return m;
    };
    meta::MetaAtom head = convert(clause.head);
    std::vector<meta::MetaAtom> body;
    for (const auto& b : clause.body) {
        body.push_back(convert(b));
    }
    return meta::MetaRule::make(std::move(signature), std::move(head), std::move(body));
}

std::vector<meta::MetaRule> dedupe_metarules(const std::vector<meta::MetaRule>& ms) {
    std::vector<meta::MetaRule> out;
    std::set<std::string> seen;
    for (const auto& m : ms) {
        if (seen.insert(m.name()).second) {
            out.push_back(m);
        }
    }
    return out;
}

CropResult crop_predicates(const std::vector<std::string>& predicates, const std::map<std::string, double>& relevance,
                           double fraction, const std::string& protect) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw std::invalid_argument("crop fraction must lie in (0,1)");
    }
    for (const auto& p : predicates) {
        if (relevance.find(p) == relevance.end()) {
            throw std::invalid_argument("no relevance score for predicate '" + p + "'");
        }
    }
    const auto n = predicates.size();
    const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
    std::vector<std::string> order = predicates;
    std::sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
        const double sa = relevance.at(a);
        const double sb = relevance.at(b);
        if (sa != sb) {
            return sa < sb;
        }
        return a > b;
    });
    std::set<std::string> drop;
    for (std::size_t i = 0; i < k && i < order.size(); ++i) {
        if (order[i] != protect) {
            drop.insert(order[i]);
        }
    }
    CropResult out;
    for (const auto& p : predicates) {
        (drop.count(p) != 0 ? out.dropped : out.kept).push_back(p);
    }
    return out;
}

} // namespace abductor::proposal
