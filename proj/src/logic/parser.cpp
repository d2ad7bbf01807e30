#include "abductor/logic/parser.hpp"

#include <cctype>
#include <string>

namespace abductor::logic {
namespace {

enum class Tok { Ident, Var, LParen, RParen, Comma, Dot, Neck, End };

struct Token {
    Tok kind;
    std::string text;
    std::size_t line;
    std::size_t column;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_blank();
        const std::size_t line = line_;
        const std::size_t col = col_;
        if (pos_ >= src_.size()) {
            return {Tok::End, "<end of input>", line, col};
        }
        const char c = src_[pos_];
        switch (c) {
        case '(':
            advance();
            return {Tok::LParen, "(", line, col};
        case ')':
            advance();
            return {Tok::RParen, ")", line, col};
        case ',':
            advance();
            return {Tok::Comma, ",", line, col};
        case '.':
            advance();
            return {Tok::Dot, ".", line, col};
        case ':':
            if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '-') {
                advance();
                advance();
                return {Tok::Neck, ":-", line, col};
            }
            break;
        default:
            break;
        }
        if (is_word_char(c)) {
            std::string word;
            while (pos_ < src_.size() && is_word_char(src_[pos_])) {
                word += src_[pos_];
                advance();
            }
            if (is_identifier(word)) {
                return {Tok::Ident, word, line, col};
            }
            if (is_variable_name(word)) {
                return {Tok::Var, word, line, col};
            }
            throw SyntaxError("invalid identifier", line, col, word);
        }
        std::string bad(1, c);
        // keep multi-byte sequences together in the diagnostic
        std::size_t k = pos_ + 1;
        while (k < src_.size() && (static_cast<unsigned char>(src_[k]) & 0xC0U) == 0x80U) {
            bad += src_[k++];
        }
        throw SyntaxError("unexpected character", line, col, bad);
    }

private:
    static bool is_word_char(char ch) {
        const auto c = static_cast<unsigned char>(ch);
        return c < 128 && (std::isalnum(c) != 0 || ch == '_');
    }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else if ((static_cast<unsigned char>(src_[pos_]) & 0xC0U) != 0x80U) {
            ++col_;
        }
        ++pos_;
    }

    void skip_blank() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '%') {
                while (pos_ < src_.size() && src_[pos_] != '\n') {
                    advance();
                }
            } else if (std::isspace(static_cast<unsigned char>(c)) != 0) {
                advance();
            } else {
                break;
            }
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) { shift(); }

    bool at_end() const { return cur_.kind == Tok::End; }
    Tok peek() const { return cur_.kind; }

    Clause clause() {
        Clause c;
        c.head = atom();
        if (cur_.kind == Tok::Neck) {
            shift();
            c.body.push_back(atom());
            while (cur_.kind == Tok::Comma) {
                shift();
                c.body.push_back(atom());
            }
        }
        expect(Tok::Dot, "expected '.' to end the clause");
        return c;
    }

    Atom atom() {
        if (cur_.kind != Tok::Ident) {
            fail("expected a predicate name");
        }
        Atom a;
        a.predicate = cur_.text;
        shift();
        if (cur_.kind == Tok::LParen) {
            a.args = arguments();
        }
        return a;
    }

    void expect(Tok kind, const char* message) {
        if (cur_.kind != kind) {
            fail(message);
        }
        shift();
    }

    [[noreturn]] void fail(const char* message) const {
        throw SyntaxError(message, cur_.line, cur_.column, cur_.text);
    }

private:
    Term term() {
        if (cur_.kind == Tok::Var) {
            Term t = Term::variable(cur_.text);
            shift();
            return t;
        }
        if (cur_.kind != Tok::Ident) {
            fail("expected a term");
        }
        std::string name = cur_.text;
        shift();
        if (cur_.kind == Tok::LParen) {
            return Term::compound(std::move(name), arguments());
        }
        return Term::constant(std::move(name));
    }

    std::vector<Term> arguments() {
        expect(Tok::LParen, "expected '('");
        std::vector<Term> args;
        args.push_back(term());
        while (cur_.kind == Tok::Comma) {
            shift();
            args.push_back(term());
        }
        expect(Tok::RParen, "expected ',' or ')'");
        return args;
    }

    void shift() { cur_ = lex_.next(); }

    Lexer lex_;
    Token cur_{Tok::End, "", 1, 1};
};

} // namespace

Program parse_program(std::string_view text) {
    Parser p(text);
    Program prog;
    while (!p.at_end()) {
        prog.add(p.clause());
    }
    return prog;
}

Clause parse_clause(std::string_view text) {
    Parser p(text);
    Clause c = p.clause();
    if (!p.at_end()) {
        p.fail("expected end of input after clause");
    }
    return c;
}

Atom parse_atom(std::string_view text) {
    Parser p(text);
    Atom a = p.atom();
    if (p.peek() == Tok::Dot) {
        p.expect(Tok::Dot, "");
    }
    if (!p.at_end()) {
        p.fail("expected end of input after atom");
    }
    return a;
}

std::vector<Atom> parse_goals(std::string_view text) {
    Parser p(text);
    std::vector<Atom> goals;
    goals.push_back(p.atom());
    while (p.peek() == Tok::Comma) {
        p.expect(Tok::Comma, "");
        goals.push_back(p.atom());
    }
    if (p.peek() == Tok::Dot) {
        p.expect(Tok::Dot, "");
    }
    if (!p.at_end()) {
        p.fail("expected ',' or end of goal list");
    }
    return goals;
}

} // namespace abductor::logic
