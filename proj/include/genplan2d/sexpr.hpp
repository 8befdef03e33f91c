#ifndef GENPLAN2D_SEXPR_HPP
#define GENPLAN2D_SEXPR_HPP

#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace genplan2d {

/*
  Minimal s-expression reader/writer shared by the domain, problem,
  abstraction and policy file formats. Atoms are bare tokens (symbols and
  numbers are not distinguished here; consumers parse numbers on demand).
  Comments run from ';' to end of line.
*/
struct Sexpr {
    bool is_atom = false;
    std::string atom;            // valid when is_atom
    std::vector<Sexpr> items;    // valid when !is_atom
    int line = 0, col = 0;

    static Sexpr make_atom(std::string s) {
        Sexpr e;
        e.is_atom = true;
        e.atom = std::move(s);
        return e;
    }
    static Sexpr make_list(std::vector<Sexpr> xs = {}) {
        Sexpr e;
        e.items = std::move(xs);
        return e;
    }

    bool is_list() const { return !is_atom; }
    size_t size() const { return items.size(); }
    const Sexpr &operator[](size_t i) const { return items[i]; }

    // Head symbol of a list, or empty string.
    std::string head() const {
        if (is_atom || items.empty() || !items[0].is_atom) return "";
        return items[0].atom;
    }
};

struct parse_error : std::runtime_error {
    int line, col;
    parse_error(const std::string &msg, int line_, int col_)
        : std::runtime_error(msg + " at line " + std::to_string(line_) + ", column " +
                             std::to_string(col_)),
          line(line_),
          col(col_) {}
};

class SexprReader {
public:
    explicit SexprReader(const std::string &text) : text_(text) {}

    // Reads every top-level form in the text.
    std::vector<Sexpr> read_all() {
        std::vector<Sexpr> out;
        skip_ws();
        while (pos_ < text_.size()) {
            out.push_back(read());
            skip_ws();
        }
        return out;
    }

    Sexpr read() {
        skip_ws();
        if (pos_ >= text_.size()) throw parse_error("unexpected end of input", line_, col_);
        char c = text_[pos_];
        if (c == '(') {
            Sexpr list = Sexpr::make_list();
            list.line = line_;
            list.col = col_;
            advance();
            skip_ws();
            while (pos_ < text_.size() && text_[pos_] != ')') {
                list.items.push_back(read());
                skip_ws();
            }
            if (pos_ >= text_.size()) throw parse_error("missing ')'", list.line, list.col);
            advance();  // ')'
            return list;
        }
        if (c == ')') throw parse_error("unexpected ')'", line_, col_);
        Sexpr a = Sexpr::make_atom("");
        a.line = line_;
        a.col = col_;
        while (pos_ < text_.size() && !isspace(static_cast<unsigned char>(text_[pos_])) &&
               text_[pos_] != '(' && text_[pos_] != ')' && text_[pos_] != ';') {
            a.atom.push_back(text_[pos_]);
            advance();
        }
        return a;
    }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_ws() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == ';') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    const std::string &text_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
};

inline void write_sexpr(std::ostream &os, const Sexpr &e, int indent = -1) {
    if (e.is_atom) {
        os << e.atom;
        return;
    }
    os << '(';
    for (size_t i = 0; i < e.items.size(); ++i) {
        if (i) {
            if (indent >= 0 && e.items[i].is_list()) {
                os << '\n' << std::string(static_cast<size_t>(indent) + 2, ' ');
            } else {
                os << ' ';
            }
        }
        write_sexpr(os, e.items[i], -1);
    }
    os << ')';
}

inline std::string to_string(const Sexpr &e) {
    std::ostringstream os;
    write_sexpr(os, e);
    return os.str();
}

}  // namespace genplan2d

#endif
