#include "abductor/meta/metarule.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <stdexcept>

#include "abductor/errors.hpp"

namespace abductor::meta {
namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

void encode_atom(std::string& out, const MetaAtom& a) {
    out += '[';
    out += a.predicate_var;
    for (const auto& t : a.term_vars) {
        out += ',';
        out += t;
    }
    out += ']';
}

// Recursive-descent reader for nested bracket lists of identifiers.
class Reader {
public:
    explicit Reader(std::string_view s) : s_(s) {}

    void expect(char c) {
        skip();
        if (pos_ >= s_.size() || s_[pos_] != c) {
            fail(std::string("expected '") + c + "'");
        }
        ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    bool peek(char c) {
        skip();
        return pos_ < s_.size() && s_[pos_] == c;
    }

    std::string ident() {
        skip();
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) != 0 || s_[pos_] == '_')) {
            ++pos_;
        }
        if (start == pos_) {
            fail("expected an identifier");
        }
        return std::string(s_.substr(start, pos_ - start));
    }

    // [a, b, c] possibly empty
    std::vector<std::string> ident_list(bool allow_empty) {
        expect('[');
        std::vector<std::string> out;
        if (accept(']')) {
            if (!allow_empty) {
                fail("empty list");
            }
            return out;
        }
        out.push_back(ident());
        while (accept(',')) {
            out.push_back(ident());
        }
        expect(']');
        return out;
    }

    void end() {
        skip();
        if (pos_ != s_.size()) {
            fail("trailing characters after meta-rule");
        }
    }

    [[noreturn]] void fail(const std::string& message) const {
        std::string tok = pos_ < s_.size() ? std::string(1, s_[pos_]) : "<end of input>";
        throw SyntaxError(message, 1, pos_ + 1, tok);
    }

private:
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])) != 0) {
            ++pos_;
        }
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

MetaAtom to_meta_atom(std::vector<std::string> items) {
    MetaAtom a;
    a.predicate_var = std::move(items.front());
    a.term_vars.assign(std::make_move_iterator(items.begin() + 1), std::make_move_iterator(items.end()));
    return a;
}

} // namespace

MetaRule MetaRule::make(std::vector<std::string> predicate_vars, MetaAtom head, std::vector<MetaAtom> body) {
    auto known = [&](const std::string& v) {
        return std::find(predicate_vars.begin(), predicate_vars.end(), v) != predicate_vars.end();
    };
    auto check = [&](const MetaAtom& a) {
        if (!known(a.predicate_var)) {
            throw UnboundPredicateVar("predicate placeholder '" + a.predicate_var +
                                      "' is not declared in the signature list");
        }
        for (const auto& t : a.term_vars) {
            if (!logic::is_variable_name(t)) {
                throw std::invalid_argument("term variable '" + t + "' must start with an uppercase letter");
            }
            if (known(t)) {
                throw std::invalid_argument("'" + t + "' is used both as predicate placeholder and term variable");
            }
        }
    };
    check(head);
    for (const auto& b : body) {
        check(b);
    }
    MetaRule m;
    m.predicate_vars_ = std::move(predicate_vars);
    m.head_ = std::move(head);
    m.body_ = std::move(body);
    char buf[20];
    std::snprintf(buf, sizeof buf, "m%012llx",
                  static_cast<unsigned long long>(fnv1a(m.canonical_structure()) & 0xffffffffffffULL));
    m.name_ = buf;
    return m;
}

std::string MetaRule::encode() const {
    std::string out = "[[";
    for (std::size_t i = 0; i < predicate_vars_.size(); ++i) {
        if (i != 0) {
            out += ',';
        }
        out += predicate_vars_[i];
    }
    out += "],";
    encode_atom(out, head_);
    out += ",[";
    for (std::size_t i = 0; i < body_.size(); ++i) {
        if (i != 0) {
            out += ',';
        }
        encode_atom(out, body_[i]);
    }
    out += "]]";
    return out;
}

std::string MetaRule::canonical_structure() const {
    std::map<std::string, std::size_t> preds;
    std::map<std::string, std::size_t> terms;
    std::string out;
    auto emit = [&](const MetaAtom& a) {
        auto [pit, pnew] = preds.try_emplace(a.predicate_var, preds.size());
        out += "P" + std::to_string(pit->second) + "(";
        for (std::size_t i = 0; i < a.term_vars.size(); ++i) {
            auto [tit, tnew] = terms.try_emplace(a.term_vars[i], terms.size());
            if (i != 0) {
                out += ',';
            }
            out += "T" + std::to_string(tit->second);
        }
        out += ')';
    };
    emit(head_);
    out += ":-";
    for (const auto& b : body_) {
        emit(b);
    }
    return out;
}

MetaRule parse_metarule(std::string_view text) {
    Reader r(text);
    r.expect('[');
    auto signature = r.ident_list(false);
    r.expect(',');
    auto head_items = r.ident_list(false);
    r.expect(',');
    r.expect('[');
    std::vector<MetaAtom> body;
    if (!r.accept(']')) {
        body.push_back(to_meta_atom(r.ident_list(false)));
        while (r.accept(',')) {
            body.push_back(to_meta_atom(r.ident_list(false)));
        }
        r.expect(']');
    }
    r.expect(']');
    r.end();
    try {
        return MetaRule::make(std::move(signature), to_meta_atom(std::move(head_items)), std::move(body));
    } catch (const std::invalid_argument& e) {
        throw SyntaxError(e.what(), 1, 1, std::string(text.substr(0, 1)));
    }
}

std::vector<MetaRule> parse_metarules(std::string_view text) {
    std::vector<MetaRule> out;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        ++line_no;
        std::string_view line = text.substr(start, end - start);
        if (const auto pct = line.find('%'); pct != std::string_view::npos) {
            line = line.substr(0, pct);
        }
        const bool blank =
            std::all_of(line.begin(), line.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; });
        if (!blank) {
            try {
                out.push_back(parse_metarule(line));
            } catch (const SyntaxError& e) {
                throw SyntaxError(e.what(), line_no, e.column(), e.token());
            }
        }
        start = end + 1;
    }
    return out;
}

logic::Clause instantiate(const MetaRule& m, const std::map<std::string, std::string>& predicates) {
    auto atom = [&](const MetaAtom& a) {
        logic::Atom out;
        out.predicate = predicates.at(a.predicate_var);
        for (const auto& t : a.term_vars) {
            out.args.push_back(logic::Term::variable(t));
        }
        return out;
    };
    logic::Clause c;
    c.head = atom(m.head());
    for (const auto& b : m.body()) {
        c.body.push_back(atom(b));
    }
    return c;
}

} // namespace abductor::meta
