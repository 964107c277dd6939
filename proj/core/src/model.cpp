#include "mlz/model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace mlz {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

Model::Model(std::vector<double> slopes, Eigen::MatrixXd couplings, double g,
             std::string label)
    : slopes_(std::move(slopes)),
      couplings_(std::move(couplings)),
      g_(g),
      label_(std::move(label)) {
    const int n = static_cast<int>(slopes_.size());
    if (n < 2) throw ValidationError("model needs at least 2 levels");
    if (couplings_.rows() != n || couplings_.cols() != n) {
        throw DimensionMismatchError(
            "couplings must be " + std::to_string(n) + "x" + std::to_string(n) +
            ", got " + std::to_string(couplings_.rows()) + "x" +
            std::to_string(couplings_.cols()));
    }
    for (int j = 0; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) {
            if (slopes_[j] == slopes_[k]) {
                throw DuplicateSlopeError(
                    "slopes " + std::to_string(j + 1) + " and " +
                    std::to_string(k + 1) + " are equal (" +
                    format_double(slopes_[j]) + "); parallel levels are not supported");
            }
            if (couplings_(j, k) != couplings_(k, j)) {
                throw AsymmetricCouplingError(
                    "coupling (" + std::to_string(j + 1) + "," + std::to_string(k + 1) +
                    ") differs from its transpose");
            }
        }
        if (couplings_(j, j) != 0.0) {
            throw NonzeroDiagonalError("coupling diagonal entry " +
                                       std::to_string(j + 1) + " must be zero");
        }
        if (!std::isfinite(slopes_[j])) throw ValidationError("non-finite slope");
    }
    if (!couplings_.allFinite()) throw ValidationError("non-finite coupling");
    if (!std::isfinite(g_)) throw ValidationError("non-finite g");
}

bool Model::is_descending() const {
    for (std::size_t i = 1; i < slopes_.size(); ++i)
        if (!(slopes_[i - 1] > slopes_[i])) return false;
    return true;
}

bool Model::operator==(const Model& other) const {
    return slopes_ == other.slopes_ && couplings_ == other.couplings_ &&
           g_ == other.g_ && label_ == other.label_;
}

Model make_model(std::vector<double> slopes, Eigen::MatrixXd couplings,
                 double g, std::string label) {
    return Model(std::move(slopes), std::move(couplings), g, std::move(label));
}

ReorderedModel reorder_descending(const Model& model) {
    const int n = model.n();
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) {
        return model.slopes()[a] > model.slopes()[b];
    });

    std::vector<double> slopes(n);
    Eigen::MatrixXd couplings(n, n);
    for (int i = 0; i < n; ++i) {
        slopes[i] = model.slopes()[perm[i]];
        for (int j = 0; j < n; ++j)
            couplings(i, j) = model.couplings()(perm[i], perm[j]);
    }
    std::vector<int> sorted_of(n);
    for (int i = 0; i < n; ++i) sorted_of[perm[i]] = i;

    // the Model constructor re-raises DuplicateSlopeError on ties
    return ReorderedModel{Model(std::move(slopes), std::move(couplings),
                                model.g(), model.label()),
                          std::move(perm), std::move(sorted_of)};
}

LambdaMatrix lambda_matrix(const Model& model) {
    if (!model.is_descending())
        throw ValidationError(
            "lambda_matrix requires strictly descending slopes; call "
            "reorder_descending first");
    const int n = model.n();
    LambdaMatrix lm;
    lm.n = n;
    lm.values = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) {
            const double bjk = model.slopes()[j] - model.slopes()[k];
            const double v = model.couplings()(j, k) * std::sqrt(M_PI / std::abs(bjk));
            lm.values(j, k) = v;
            lm.values(k, j) = v;
        }
    }
    return lm;
}

// ---------------------------------------------------------------------------
// model file format (see docs/model-format.md)
// ---------------------------------------------------------------------------

namespace {

struct Token {
    enum Kind { Ident, Number, String, Equals, LBracket, RBracket, Comma, End };
    Kind kind;
    std::string text;
    double number = 0.0;
    int line = 1;
    int col = 1;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    Token next() {
        skip_ws_and_comments();
        Token t;
        t.line = line_;
        t.col = col_;
        if (pos_ >= text_.size()) {
            t.kind = Token::End;
            return t;
        }
        const char c = text_[pos_];
        if (c == '=') { advance(); t.kind = Token::Equals; return t; }
        if (c == '[') { advance(); t.kind = Token::LBracket; return t; }
        if (c == ']') { advance(); t.kind = Token::RBracket; return t; }
        if (c == ',') { advance(); t.kind = Token::Comma; return t; }
        if (c == '"') return lex_string(t);
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return lex_ident(t);
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' ||
            c == '.')
            return lex_number(t);
        throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
    }

private:
    void advance() {
        if (text_[pos_] == '\n') { ++line_; col_ = 1; } else { ++col_; }
        ++pos_;
    }

    void skip_ws_and_comments() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    Token lex_string(Token t) {
        advance();  // opening quote
        std::string out;
        while (pos_ < text_.size() && text_[pos_] != '"' && text_[pos_] != '\n') {
            out.push_back(text_[pos_]);
            advance();
        }
        if (pos_ >= text_.size() || text_[pos_] != '"')
            throw ParseError("unterminated string", t.line, t.col);
        advance();  // closing quote
        t.kind = Token::String;
        t.text = std::move(out);
        return t;
    }

    Token lex_ident(Token t) {
        std::string out;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                text_[pos_] == '_' || text_[pos_] == '-')) {
            out.push_back(text_[pos_]);
            advance();
        }
        t.kind = Token::Ident;
        t.text = std::move(out);
        return t;
    }

    Token lex_number(Token t) {
        const std::size_t start = pos_;
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' ||
                c == '.' || c == 'e' || c == 'E') {
                advance();
            } else {
                break;
            }
        }
        const std::string_view sv(text_.data() + start, pos_ - start);
        double value = 0.0;
        const auto res = std::from_chars(sv.data(), sv.data() + sv.size(), value);
        if (res.ec != std::errc{} || res.ptr != sv.data() + sv.size())
            throw ParseError("malformed number '" + std::string(sv) + "'", t.line, t.col);
        t.kind = Token::Number;
        t.number = value;
        t.text = std::string(sv);
        return t;
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

}  // namespace

Model parse_model(const std::string& text) {
    Lexer lex(text);

    bool have_n = false, have_slopes = false, have_couplings = false,
         have_g = false, have_label = false;
    int n = 0;
    std::vector<double> slopes, upper;
    double g = 1.0;
    std::string label;

    Token t = lex.next();
    while (t.kind != Token::End) {
        if (t.kind != Token::Ident)
            throw ParseError("expected a key name", t.line, t.col);
        const std::string key = t.text;
        const Token keytok = t;
        t = lex.next();
        if (t.kind != Token::Equals)
            throw ParseError("expected '=' after key '" + key + "'", t.line, t.col);
        t = lex.next();

        auto read_list = [&](std::vector<double>& out) {
            if (t.kind != Token::LBracket)
                throw ParseError("expected '[' to start list for key '" + key + "'",
                                 t.line, t.col);
            t = lex.next();
            while (t.kind != Token::RBracket) {
                if (t.kind != Token::Number)
                    throw ParseError("expected a number in list for key '" + key + "'",
                                     t.line, t.col);
                out.push_back(t.number);
                t = lex.next();
                if (t.kind == Token::Comma) t = lex.next();
            }
            t = lex.next();  // consume ']' lookahead
        };

        if (key == "n") {
            if (have_n) throw ParseError("duplicate key 'n'", keytok.line, keytok.col);
            if (t.kind != Token::Number || t.number != std::floor(t.number))
                throw ParseError("'n' must be an integer", t.line, t.col);
            n = static_cast<int>(t.number);
            have_n = true;
            t = lex.next();
        } else if (key == "slopes") {
            if (have_slopes)
                throw ParseError("duplicate key 'slopes'", keytok.line, keytok.col);
            read_list(slopes);
            have_slopes = true;
        } else if (key == "couplings") {
            if (have_couplings)
                throw ParseError("duplicate key 'couplings'", keytok.line, keytok.col);
            read_list(upper);
            have_couplings = true;
        } else if (key == "g") {
            if (have_g) throw ParseError("duplicate key 'g'", keytok.line, keytok.col);
            if (t.kind != Token::Number)
                throw ParseError("'g' must be a number", t.line, t.col);
            g = t.number;
            have_g = true;
            t = lex.next();
        } else if (key == "label") {
            if (have_label)
                throw ParseError("duplicate key 'label'", keytok.line, keytok.col);
            if (t.kind == Token::String || t.kind == Token::Ident) {
                label = t.text;
            } else {
                throw ParseError("'label' must be a string", t.line, t.col);
            }
            have_label = true;
            t = lex.next();
        } else {
            throw ParseError("unknown key '" + key + "'", keytok.line, keytok.col);
        }
    }

    if (!have_n) throw ParseError("missing required key 'n'", t.line, t.col);
    if (!have_slopes) throw ParseError("missing required key 'slopes'", t.line, t.col);
    if (!have_couplings)
        throw ParseError("missing required key 'couplings'", t.line, t.col);

    if (n < 2) throw ValidationError("'n' must be >= 2");
    if (static_cast<int>(slopes.size()) != n)
        throw DimensionMismatchError("expected " + std::to_string(n) +
                                     " slopes, got " + std::to_string(slopes.size()));
    const std::size_t expect = static_cast<std::size_t>(n) * (n - 1) / 2;
    if (upper.size() != expect)
        throw DimensionMismatchError(
            "expected " + std::to_string(expect) +
            " upper-triangle couplings for n=" + std::to_string(n) + ", got " +
            std::to_string(upper.size()));

    Eigen::MatrixXd couplings = Eigen::MatrixXd::Zero(n, n);
    std::size_t idx = 0;
    for (int j = 0; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) {
            couplings(j, k) = upper[idx];
            couplings(k, j) = upper[idx];
            ++idx;
        }
    }
    return Model(std::move(slopes), std::move(couplings), g, std::move(label));
}

std::string serialize_model(const Model& model) {
    std::ostringstream out;
    const int n = model.n();
    out << "# one-crossing MLZ model\n";
    out << "n = " << n << "\n";
    out << "slopes = [";
    for (int j = 0; j < n; ++j)
        out << (j ? ", " : "") << format_double(model.slopes()[j]);
    out << "]\n";
    out << "couplings = [";  // upper triangle, row-major (j,k) with j<k
    bool first = true;
    for (int j = 0; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) {
            out << (first ? "" : ", ") << format_double(model.couplings()(j, k));
            first = false;
        }
    }
    out << "]\n";
    out << "g = " << format_double(model.g()) << "\n";
    if (!model.label().empty()) out << "label = \"" << model.label() << "\"\n";
    return out.str();
}

std::string model_hash(const Model& model) {
    const std::string text = serialize_model(model);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

}  // namespace mlz
