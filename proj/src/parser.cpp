#include "pawns/parser.hpp"

#include <cctype>
#include <set>

namespace pawns {

ParseError::ParseError(const std::string& msg, SourcePos p)
    : std::runtime_error(to_string(p) + ": " + msg), pos(p) {}

namespace {

enum class Tok { Ident, UIdent, Int, Sym, Newline, End };

struct Token {
    Tok kind;
    std::string text;
    SourcePos pos;
    std::size_t offset = 0;
};

std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    static const char* syms[] = {"->", ":=", "::", "<=", ">=", "==", "(", ")", "{", "}", "[",
                                 "]",  ",",  ";",  ":",  "=",  "*",  "!", "|", ".", "<", ">",
                                 "+",  "-"};
    while (i < src.size()) {
        char c = src[i];
        SourcePos pos{line, col};
        if (c == '\n') {
            out.push_back({Tok::Newline, "\n", pos, i});
            advance(1);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' ||
                    src[j] == '\''))
                ++j;
            std::string word(src.substr(i, j - i));
            Tok kind = std::isupper(static_cast<unsigned char>(c)) ? Tok::UIdent : Tok::Ident;
            out.push_back({kind, word, pos, i});
            advance(j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            out.push_back({Tok::Int, std::string(src.substr(i, j - i)), pos, i});
            advance(j - i);
            continue;
        }
        bool matched = false;
        for (const char* s : syms) {
            std::string_view sv(s);
            if (src.substr(i, sv.size()) == sv) {
                out.push_back({Tok::Sym, std::string(sv), pos, i});
                advance(sv.size());
                matched = true;
                break;
            }
        }
        if (!matched) throw ParseError(std::string("unexpected character '") + c + "'", pos);
    }
    out.push_back({Tok::End, "", {line, col}, src.size()});
    return out;
}

const std::set<std::string> kKeywords = {"data",  "type",  "fn",    "pre",      "post",
                                         "case",  "error", "array", "arrayref", "nosharing",
                                         "abstract"};

class Parser {
public:
    Parser(std::string_view src) : src_(src), toks_(lex(src)) {}

    Program program() {
        Program p;
        std::set<std::string> fnNames;
        skip_newlines();
        while (!at_end()) {
            if (is_word("data")) {
                p.types.add_data(data_decl());
            } else if (is_word("type")) {
                type_decl(p.types);
            } else if (is_word("fn")) {
                FuncDef f = fn_decl();
                if (!fnNames.insert(f.name).second)
                    throw ParseError("duplicate definition of function " + f.name, f.pos);
                p.funcs.push_back(std::move(f));
            } else {
                throw error("expected 'data', 'type' or 'fn'");
            }
            skip_newlines();
        }
        return p;
    }

    TypePtr type_only() {
        skip_newlines();
        TypePtr t = type();
        skip_newlines();
        if (!at_end()) throw error("unexpected text after type");
        return t;
    }

private:
    std::string_view src_;
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    int constCounter_ = 0;

    const Token& peek(std::size_t k = 0) const {
        return toks_[std::min(pos_ + k, toks_.size() - 1)];
    }
    bool at_end() const { return peek().kind == Tok::End; }
    Token next() {
        Token t = peek();
        if (pos_ < toks_.size() - 1) ++pos_;
        return t;
    }
    bool is_sym(const std::string& s, std::size_t k = 0) const {
        return peek(k).kind == Tok::Sym && peek(k).text == s;
    }
    bool is_word(const std::string& s, std::size_t k = 0) const {
        return peek(k).kind == Tok::Ident && peek(k).text == s;
    }
    bool is_newline() const { return peek().kind == Tok::Newline; }
    void skip_newlines() {
        while (is_newline()) next();
    }
    bool at_stmt_end() const {
        return peek().kind == Tok::Newline || peek().kind == Tok::End || is_sym(";") ||
               is_sym("}");
    }

    ParseError error(const std::string& msg) const {
        const Token& t = peek();
        std::string found = t.kind == Tok::End       ? "end of input"
                            : t.kind == Tok::Newline ? "end of line"
                                                     : "'" + t.text + "'";
        return ParseError(msg + ", found " + found, t.pos);
    }

    void expect_sym(const std::string& s) {
        if (!is_sym(s)) throw error("expected '" + s + "'");
        next();
    }

    std::string ident(const char* what = "identifier") {
        if (peek().kind != Tok::Ident || kKeywords.count(peek().text))
            throw error(std::string("expected ") + what);
        return next().text;
    }

    std::string uident(const char* what = "constructor") {
        if (peek().kind != Tok::UIdent) throw error(std::string("expected ") + what);
        return next().text;
    }

    // ---- types ----

    TypePtr type() {
        std::vector<TypePtr> parts{btype()};
        while (is_sym("->")) {
            next();
            skip_newlines();
            parts.push_back(btype());
        }
        if (parts.size() == 1) return parts[0];
        TypePtr result = parts.back();
        parts.pop_back();
        return Type::fn({}, parts, result, default_arrow_sig(parts, result));
    }

    TypePtr btype() {
        if (peek().kind == Tok::UIdent) {
            std::string name = next().text;
            if (name == "Ref") return Type::ref(atype());
            if (name == "Array") return Type::array(atype());
            std::vector<TypePtr> args;
            while (starts_atype()) args.push_back(atype());
            return Type::named(name, std::move(args));
        }
        return atype();
    }

    bool starts_atype() const {
        return peek().kind == Tok::UIdent ||
               (peek().kind == Tok::Ident && !kKeywords.count(peek().text)) || is_sym("(");
    }

    TypePtr atype() {
        if (peek().kind == Tok::UIdent) {
            std::string name = next().text;
            if (name == "Ref" || name == "Array")
                throw ParseError("'" + name + "' needs an argument here; use parentheses",
                                 toks_[pos_ - 1].pos);
            return Type::named(name);
        }
        if (peek().kind == Tok::Ident && !kKeywords.count(peek().text))
            return Type::var(next().text);
        if (is_sym("(")) {
            next();
            if (is_sym(")")) {
                next();
                return Type::unit_type();
            }
            TypePtr t = type();
            expect_sym(")");
            return t;
        }
        throw error("expected a type");
    }

    // ---- declarations ----

    DataDef data_decl() {
        SourcePos pos = next().pos;
        DataDef d;
        d.pos = pos;
        d.name = uident("type name");
        while (peek().kind == Tok::Ident) d.params.push_back(ident("type parameter"));
        expect_sym("=");
        skip_newlines();
        for (;;) {
            ConstructorDef c;
            c.name = uident();
            while (starts_atype()) c.argTypes.push_back(atype());
            d.constructors.push_back(std::move(c));
            std::size_t save = pos_;
            skip_newlines();
            if (is_sym("|")) {
                next();
                skip_newlines();
                continue;
            }
            pos_ = save;
            break;
        }
        if (!at_stmt_end() && !at_end()) throw error("unexpected text in data declaration");
        return d;
    }

    void type_decl(TypeEnv& env) {
        SourcePos pos = next().pos;
        std::string name = uident("type name");
        std::vector<std::string> params;
        while (peek().kind == Tok::Ident) params.push_back(ident("type parameter"));
        expect_sym("=");
        TypePtr body = type();
        env.add_synonym(name, std::move(params), std::move(body), pos);
    }

    FuncDef fn_decl() {
        FuncDef f;
        f.pos = next().pos;
        f.name = ident("function name");
        auto sig = std::make_shared<SharingSig>();
        sig->key = f.name;
        expect_sym("(");
        skip_newlines();
        if (!is_sym(")")) {
            for (;;) {
                Formal fm;
                if (is_sym("!")) {
                    next();
                    fm.isMutable = true;
                }
                fm.name = ident("parameter name");
                expect_sym(":");
                fm.type = type();
                sig->formals.push_back(std::move(fm));
                skip_newlines();
                if (is_sym(",")) {
                    next();
                    skip_newlines();
                    continue;
                }
                break;
            }
        }
        expect_sym(")");
        expect_sym("->");
        if (peek().kind == Tok::Ident && is_sym(":", 1)) {
            sig->resultName = next().text;
            next();
        }
        sig->resultType = type();
        skip_newlines();
        bool seenPre = false, seenPost = false;
        while (is_word("pre") || is_word("post")) {
            bool pre = next().text == "pre";
            if ((pre && seenPre) || (!pre && seenPost))
                throw ParseError(std::string("duplicate ") + (pre ? "pre" : "post") + "condition",
                                 toks_[pos_ - 1].pos);
            (pre ? seenPre : seenPost) = true;
            (pre ? sig->pre : sig->post) = cond();
            skip_newlines();
        }
        bool anyMutable = false;
        for (const auto& fm : sig->formals) anyMutable = anyMutable || fm.isMutable;
        if (!seenPre && !seenPost && !anyMutable) {
            // No written conditions: the implicit pure signature, so the
            // function can be passed where an arrow type is expected.
            sig->key = "pure";
            for (const auto& fm : sig->formals) {
                CondStmt st;
                st.lhs = fm.name;
                st.rhs.kind = CondExpr::Kind::Abstract;
                st.pos = f.pos;
                sig->pre.stmts.push_back(st);
            }
            CondStmt st;
            st.lhs = sig->resultName;
            st.rhs.kind = CondExpr::Kind::Abstract;
            st.pos = f.pos;
            sig->post.stmts.push_back(st);
        }
        std::set<std::string> names;
        for (const auto& fm : sig->formals)
            if (!names.insert(fm.name).second)
                throw ParseError("duplicate parameter " + fm.name, f.pos);
        if (names.count(sig->resultName))
            throw ParseError("result name " + sig->resultName + " clashes with a parameter", f.pos);
        f.sig = sig;
        f.body = block();
        number_points(f);
        return f;
    }

    // ---- conditions ----

    CondForm cond() {
        CondForm c;
        c.pos = peek().pos;
        if (is_word("nosharing")) {
            next();
            return c;
        }
        if (is_sym("{") && is_sym("{", 1)) {
            std::size_t start = peek().offset;
            int depth = 0;
            std::size_t end = start;
            for (; end < src_.size(); ++end) {
                if (src_[end] == '{') ++depth;
                if (src_[end] == '}' && --depth == 0) break;
            }
            if (depth != 0) throw error("unterminated alias set");
            c.kind = CondForm::Kind::Explicit;
            try {
                c.cliques = parse_cliques(src_.substr(start, end - start + 1));
            } catch (const std::runtime_error& e) {
                throw ParseError(std::string("bad alias set: ") + e.what(), c.pos);
            }
            while (!at_end() && peek().offset <= end) next();
            return c;
        }
        for (;;) {
            c.stmts.push_back(cond_stmt());
            if (is_sym(";")) {
                next();
                skip_newlines();
                continue;
            }
            std::size_t save = pos_;
            skip_newlines();
            if (peek().kind == Tok::Ident && !kKeywords.count(peek().text)) continue;
            if (is_sym("*")) continue;
            pos_ = save;
            break;
        }
        return c;
    }

    int derefs() {
        int k = 0;
        while (is_sym("*")) {
            next();
            ++k;
        }
        return k;
    }

    CondStmt cond_stmt() {
        CondStmt st;
        st.pos = peek().pos;
        st.lhsDerefs = derefs();
        st.lhs = ident("variable in condition");
        expect_sym("=");
        if (is_word("abstract")) {
            next();
            st.rhs.kind = CondExpr::Kind::Abstract;
        } else if (peek().kind == Tok::UIdent) {
            st.rhs.kind = CondExpr::Kind::Cons;
            st.rhs.name = next().text;
            while (peek().kind == Tok::Ident && !kKeywords.count(peek().text))
                st.rhs.args.push_back(next().text);
        } else {
            st.rhs.kind = CondExpr::Kind::Var;
            st.rhs.derefs = derefs();
            st.rhs.name = ident("variable in condition");
            if (peek().kind == Tok::Ident && !kKeywords.count(peek().text))
                throw error("function calls are not allowed in conditions");
        }
        return st;
    }

    // ---- statements ----

    std::vector<Stat> block() {
        skip_newlines();
        expect_sym("{");
        std::vector<Stat> out;
        for (;;) {
            while (is_newline() || is_sym(";")) next();
            if (is_sym("}")) {
                next();
                break;
            }
            if (at_end()) throw error("expected '}'");
            out.push_back(statement());
            if (!at_stmt_end()) throw error("expected end of statement");
        }
        return out;
    }

    std::string operand() {
        const Token& t = peek();
        if (t.kind == Tok::Ident && !kKeywords.count(t.text)) return next().text;
        if (t.kind == Tok::UIdent || t.kind == Tok::Int) {
            next();
            return "%" + std::to_string(++constCounter_) + ":" + t.text;
        }
        if (is_sym("-") && peek(1).kind == Tok::Int) {
            next();
            return "%" + std::to_string(++constCounter_) + ":-" + next().text;
        }
        if (is_sym("(") && is_sym(")", 1)) {
            next();
            next();
            return "%" + std::to_string(++constCounter_) + ":()";
        }
        throw error("expected a variable or constant");
    }

    bool starts_operand() const {
        const Token& t = peek();
        return (t.kind == Tok::Ident && !kKeywords.count(t.text)) || t.kind == Tok::UIdent ||
               t.kind == Tok::Int || (is_sym("(") && is_sym(")", 1)) ||
               (is_sym("-") && peek(1).kind == Tok::Int);
    }

    void trailing_bangs(Stat& s) {
        while (is_sym("!")) {
            next();
            s.bangs.insert(ident("variable after '!'"));
        }
    }

    bool at_binop() const {
        if (peek().kind != Tok::Sym) return false;
        return is_builtin_op(peek().text);
    }

    Stat statement() {
        Stat s;
        s.pos = peek().pos;
        if (is_word("error")) {
            next();
            s.kind = StatKind::Error;
            return s;
        }
        if (is_word("case")) return case_stat();
        if (is_sym("{")) {
            s.kind = StatKind::Seq;
            s.body = block();
            return s;
        }
        if (is_sym("*")) {
            next();
            if (is_sym("!")) {
                next();
                s.targetBang = true;
            }
            s.target = ident("variable after '*'");
            if (is_sym(":=")) {
                next();
                s.kind = StatKind::Assign;
                s.source = operand();
                trailing_bangs(s);
                if (s.targetBang) s.bangs.insert(s.target);
                return s;
            }
            if (s.targetBang) throw error("expected ':=' after '*!" + s.target + "'");
            expect_sym("=");
            s.kind = StatKind::DerefEq;
            s.source = operand();
            trailing_bangs(s);
            return s;
        }
        s.target = ident("statement");
        expect_sym("=");
        rhs(s);
        return s;
    }

    void rhs(Stat& s) {
        if (is_sym("*")) {
            next();
            s.kind = StatKind::EqDeref;
            s.source = ident("variable after '*'");
            trailing_bangs(s);
            return;
        }
        if (peek().kind == Tok::Int || (is_sym("-") && peek(1).kind == Tok::Int)) {
            bool neg = is_sym("-");
            if (neg) next();
            s.kind = StatKind::IntLit;
            s.intValue = std::stoll(next().text) * (neg ? -1 : 1);
            trailing_bangs(s);
            return;
        }
        if (is_sym("(") && is_sym(")", 1)) {
            next();
            next();
            s.kind = StatKind::DC;
            s.cons = "()";
            trailing_bangs(s);
            return;
        }
        if (is_word("array")) {
            next();
            s.kind = StatKind::ArrayLit;
            while (starts_operand()) s.args.push_back(operand());
            trailing_bangs(s);
            return;
        }
        if (is_word("arrayref")) {
            next();
            s.kind = StatKind::ArrayRef;
            s.args.push_back(ident("array variable"));
            s.args.push_back(operand());
            trailing_bangs(s);
            return;
        }
        if (peek().kind == Tok::UIdent) {
            s.kind = StatKind::DC;
            s.cons = next().text;
            while (starts_operand()) s.args.push_back(operand());
            trailing_bangs(s);
            return;
        }
        if (is_sym("(")) {
            next();
            s.kind = StatKind::App;
            s.fixedArgs = true;
            app_items(s, true);
            expect_sym(")");
            trailing_bangs(s);
            return;
        }
        s.source = ident("expression");
        if (is_sym("::")) {
            next();
            s.kind = StatKind::Instype;
            s.annotType = type();
            trailing_bangs(s);
            return;
        }
        if (at_binop()) {
            s.kind = StatKind::App;
            std::string lhs = s.source;
            s.source = next().text;
            s.args = {lhs, operand()};
            s.argBangs = {false, false};
            trailing_bangs(s);
            return;
        }
        if (at_stmt_end()) {
            s.kind = StatKind::EqVar;
            return;
        }
        s.kind = StatKind::App;
        app_args(s);
    }

    // Items after the callee: `x`, `!x` or constants.
    void app_args(Stat& s) {
        while (is_sym("!") || starts_operand()) {
            bool bang = false;
            if (is_sym("!")) {
                next();
                bang = true;
            }
            s.args.push_back(bang ? ident("variable after '!'") : operand());
            s.argBangs.push_back(bang);
        }
    }

    void app_items(Stat& s, bool parenthesized) {
        (void)parenthesized;
        std::string first = ident("function");
        if (at_binop()) {
            s.source = next().text;
            s.args = {first, operand()};
            s.argBangs = {false, false};
            return;
        }
        s.source = first;
        app_args(s);
    }

    Stat case_stat() {
        Stat s;
        s.pos = next().pos;
        s.kind = StatKind::Case;
        s.source = ident("case scrutinee");
        skip_newlines();
        expect_sym("{");
        std::set<std::string> seen;
        for (;;) {
            while (is_newline() || is_sym(";") || (!s.alts.empty() && is_sym("|"))) next();
            if (is_sym("}")) {
                next();
                break;
            }
            Alt a;
            a.pos = peek().pos;
            bool paren = false;
            if (is_sym("(") && !is_sym(")", 1)) {
                next();
                paren = true;
            }
            if (is_sym("(") && is_sym(")", 1)) {
                next();
                next();
                a.cons = "()";
            } else {
                a.cons = uident("constructor pattern");
            }
            while (is_sym("*")) {
                next();
                a.refVars.push_back(ident("pattern variable"));
            }
            if (peek().kind == Tok::Ident && !kKeywords.count(peek().text))
                throw error("pattern arguments bind references and must be written '*v'");
            if (paren) expect_sym(")");
            if (!seen.insert(a.cons).second)
                throw ParseError("duplicate alternative " + a.cons, a.pos);
            expect_sym("->");
            skip_newlines();
            if (is_sym("{")) {
                a.body = block();
            } else {
                a.body.push_back(statement());
                if (!at_stmt_end()) throw error("expected end of statement");
            }
            s.alts.push_back(std::move(a));
        }
        if (s.alts.empty()) throw ParseError("case with no alternatives", s.pos);
        return s;
    }
};

} // namespace

Program parse_program(std::string_view text) { return Parser(text).program(); }

TypePtr parse_type(std::string_view text) { return Parser(text).type_only(); }

std::vector<std::vector<CondVarComp>> parse_cliques(std::string_view text) {
    std::size_t i = 0;
    auto ws = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    auto fail = [&](const std::string& msg) {
        throw std::runtime_error(msg + " at offset " + std::to_string(i));
    };
    auto expect = [&](char c) {
        ws();
        if (i >= text.size() || text[i] != c) fail(std::string("expected '") + c + "'");
        ++i;
    };
    std::vector<std::vector<CondVarComp>> out;
    expect('{');
    ws();
    if (i < text.size() && text[i] == '}') {
        ++i;
        return out;
    }
    for (;;) {
        expect('{');
        std::vector<CondVarComp> clique;
        for (;;) {
            ws();
            CondVarComp vc;
            std::size_t start = i;
            int angle = 0;
            while (i < text.size()) {
                char c = text[i];
                if (c == '<') ++angle;
                if (c == '>') --angle;
                if (angle == 0 && c == '.' && i + 1 < text.size() && text[i + 1] == '[') break;
                ++i;
            }
            if (i >= text.size()) fail("expected '.['");
            vc.var = std::string(text.substr(start, i - start));
            while (!vc.var.empty() && std::isspace(static_cast<unsigned char>(vc.var.back())))
                vc.var.pop_back();
            if (vc.var.empty()) fail("missing variable name");
            i += 2;
            ws();
            while (i < text.size() && text[i] != ']') {
                std::size_t s = i;
                while (i < text.size() && text[i] != '.' && text[i] != ']' && text[i] != ',') ++i;
                std::string cons(text.substr(s, i - s));
                while (!cons.empty() && std::isspace(static_cast<unsigned char>(cons.back())))
                    cons.pop_back();
                expect('.');
                ws();
                std::size_t d = i;
                while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
                if (d == i) fail("expected argument index");
                vc.path.emplace_back(cons, std::stoi(std::string(text.substr(d, i - d))));
                ws();
                if (i < text.size() && text[i] == ',') {
                    ++i;
                    ws();
                }
            }
            expect(']');
            clique.push_back(std::move(vc));
            ws();
            if (i < text.size() && text[i] == ',') {
                ++i;
                continue;
            }
            break;
        }
        expect('}');
        out.push_back(std::move(clique));
        ws();
        if (i < text.size() && text[i] == ',') {
            ++i;
            continue;
        }
        break;
    }
    expect('}');
    ws();
    if (i != text.size()) fail("unexpected text after alias set");
    return out;
}

} // namespace pawns
