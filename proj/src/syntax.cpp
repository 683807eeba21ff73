#include "pawns/syntax.hpp"

#include <sstream>

namespace pawns {

const char* to_string(StatKind k) {
    switch (k) {
    case StatKind::Seq: return "Seq";
    case StatKind::EqVar: return "EqVar";
    case StatKind::EqDeref: return "EqDeref";
    case StatKind::DerefEq: return "DerefEq";
    case StatKind::DC: return "DC";
    case StatKind::Case: return "Case";
    case StatKind::Error: return "Error";
    case StatKind::App: return "App";
    case StatKind::Assign: return "Assign";
    case StatKind::Instype: return "Instype";
    case StatKind::IntLit: return "IntLit";
    case StatKind::ArrayLit: return "ArrayLit";
    case StatKind::ArrayRef: return "ArrayRef";
    }
    return "?";
}

bool is_const_operand(const std::string& name) { return !name.empty() && name[0] == '%'; }

std::string const_operand_text(const std::string& name) {
    auto colon = name.find(':');
    return colon == std::string::npos ? name.substr(1) : name.substr(colon + 1);
}

std::shared_ptr<const SharingSig> default_arrow_sig(const std::vector<TypePtr>& params,
                                                    const TypePtr& result) {
    auto sig = std::make_shared<SharingSig>();
    sig->key = "pure";
    sig->synthesized = true;
    for (std::size_t i = 0; i < params.size(); ++i) {
        std::string w = "w" + std::to_string(i + 1);
        sig->formals.push_back({w, false, params[i]});
        CondStmt st;
        st.lhs = w;
        st.rhs.kind = CondExpr::Kind::Abstract;
        sig->pre.stmts.push_back(st);
    }
    sig->resultName = "r";
    sig->resultType = result;
    CondStmt st;
    st.lhs = "r";
    st.rhs.kind = CondExpr::Kind::Abstract;
    sig->post.stmts.push_back(st);
    return sig;
}

bool FuncDef::is_param(const std::string& v) const {
    for (const auto& f : sig->formals)
        if (f.name == v) return true;
    return false;
}

bool FuncDef::is_mutable_param(const std::string& v) const {
    for (const auto& f : sig->formals)
        if (f.name == v) return f.isMutable;
    return false;
}

const FuncDef* Program::find(const std::string& name) const {
    for (const auto& f : funcs)
        if (f.name == name) return &f;
    return nullptr;
}

FuncDef* Program::find(const std::string& name) {
    for (auto& f : funcs)
        if (f.name == name) return &f;
    return nullptr;
}

bool is_abstract_var(const std::string& v) { return v.rfind("abstract<", 0) == 0; }

std::string abstract_var(const TypePtr& t) { return "abstract<" + show_type(t) + ">"; }

bool is_builtin_op(const std::string& op) {
    return op == "<=" || op == "<" || op == ">=" || op == ">" || op == "==" || op == "+" ||
           op == "-" || op == "*";
}

TypePtr builtin_op_type(const std::string& op) {
    auto sig = std::make_shared<SharingSig>();
    sig->key = "op" + op;
    sig->formals = {{"a", false, Type::int_type()}, {"b", false, Type::int_type()}};
    bool cmp = op == "<=" || op == "<" || op == ">=" || op == ">" || op == "==";
    sig->resultType = cmp ? Type::bool_type() : Type::int_type();
    return Type::fn({}, {Type::int_type(), Type::int_type()}, sig->resultType, sig);
}

namespace {

void number_stats(FuncDef& f, std::vector<Stat>& stats, int& counter) {
    for (auto& s : stats) {
        if (s.kind == StatKind::Case) {
            for (auto& a : s.alts) {
                a.point = ++counter;
                f.pointPos.push_back(a.pos);
                number_stats(f, a.body, counter);
            }
            s.point = ++counter;
            f.pointPos.push_back(s.pos);
        } else if (s.kind == StatKind::Seq) {
            number_stats(f, s.body, counter);
            s.point = counter;
        } else {
            s.point = ++counter;
            f.pointPos.push_back(s.pos);
        }
    }
}

} // namespace

void number_points(FuncDef& f) {
    int counter = 0;
    f.pointPos.assign(1, f.pos);
    number_stats(f, f.body, counter);
    f.pointCount = counter + 1;
    f.endPoint = f.body.empty() ? 0 : f.body.back().point;
}

std::string print_type(const TypePtr& t) { return show_type(t); }

namespace {

std::string operand(const std::string& v) {
    return is_const_operand(v) ? const_operand_text(v) : v;
}

std::string print_cond_expr(const CondExpr& e) {
    switch (e.kind) {
    case CondExpr::Kind::Abstract: return "abstract";
    case CondExpr::Kind::Var: return std::string(e.derefs, '*') + e.name;
    case CondExpr::Kind::Cons: {
        std::string s = e.name;
        for (const auto& a : e.args) s += " " + a;
        return s;
    }
    }
    return "?";
}

void print_stats(std::ostringstream& out, const std::vector<Stat>& stats, int indent);

std::string trailing_bangs(const Stat& s, const std::set<std::string>& skip = {}) {
    std::string r;
    for (const auto& b : s.bangs)
        if (!skip.count(b)) r += " !" + b;
    return r;
}

void print_stat(std::ostringstream& out, const Stat& s, int indent) {
    std::string pad(indent, ' ');
    switch (s.kind) {
    case StatKind::Seq:
        out << pad << "{\n";
        print_stats(out, s.body, indent + 2);
        out << pad << "}\n";
        return;
    case StatKind::Error: out << pad << "error\n"; return;
    case StatKind::EqVar:
        out << pad << s.target << " = " << s.source << trailing_bangs(s) << "\n";
        return;
    case StatKind::EqDeref:
        out << pad << s.target << " = *" << s.source << trailing_bangs(s) << "\n";
        return;
    case StatKind::DerefEq:
        out << pad << "*" << s.target << " = " << operand(s.source) << trailing_bangs(s) << "\n";
        return;
    case StatKind::IntLit:
        out << pad << s.target << " = " << s.intValue << trailing_bangs(s) << "\n";
        return;
    case StatKind::DC: {
        out << pad << s.target << " = " << s.cons;
        for (const auto& a : s.args) out << " " << operand(a);
        out << trailing_bangs(s) << "\n";
        return;
    }
    case StatKind::ArrayLit: {
        out << pad << s.target << " = array";
        for (const auto& a : s.args) out << " " << operand(a);
        out << trailing_bangs(s) << "\n";
        return;
    }
    case StatKind::ArrayRef:
        out << pad << s.target << " = arrayref " << s.args.at(0) << " " << operand(s.args.at(1))
            << trailing_bangs(s) << "\n";
        return;
    case StatKind::Instype:
        out << pad << s.target << " = " << s.source << " :: " << print_type(s.annotType)
            << trailing_bangs(s) << "\n";
        return;
    case StatKind::Assign: {
        std::set<std::string> skip;
        if (s.targetBang) skip.insert(s.target);
        out << pad << "*" << (s.targetBang ? "!" : "") << s.target << " := " << operand(s.source)
            << trailing_bangs(s, skip) << "\n";
        return;
    }
    case StatKind::App: {
        if (is_builtin_op(s.source) && s.args.size() == 2) {
            out << pad << s.target << " = " << operand(s.args[0]) << " " << s.source << " "
                << operand(s.args[1]) << trailing_bangs(s) << "\n";
            return;
        }
        std::set<std::string> banged;
        std::string items;
        for (std::size_t i = 0; i < s.args.size(); ++i) {
            bool b = i < s.argBangs.size() && s.argBangs[i];
            if (b) banged.insert(s.args[i]);
            items += " " + std::string(b ? "!" : "") + operand(s.args[i]);
        }
        std::string extra = trailing_bangs(s, banged);
        if (s.fixedArgs || !extra.empty())
            out << pad << s.target << " = (" << s.source << items << ")" << extra << "\n";
        else
            out << pad << s.target << " = " << s.source << items << "\n";
        return;
    }
    case StatKind::Case: {
        out << pad << "case " << s.source << " {\n";
        for (const auto& a : s.alts) {
            out << pad << "  " << a.cons;
            for (const auto& r : a.refVars) out << " *" << r;
            out << " -> {\n";
            print_stats(out, a.body, indent + 4);
            out << pad << "  }\n";
        }
        out << pad << "}\n";
        return;
    }
    }
}

void print_stats(std::ostringstream& out, const std::vector<Stat>& stats, int indent) {
    for (const auto& s : stats) print_stat(out, s, indent);
}

std::string print_data_arg(const TypePtr& t) {
    std::string s = print_type(t);
    bool simple = t->kind == Type::Kind::Var ||
                  (t->kind == Type::Kind::Named && t->args.empty());
    return simple ? s : "(" + s + ")";
}

} // namespace

std::string print_cond(const CondForm& c) {
    if (c.kind == CondForm::Kind::Explicit) {
        std::string s = "{";
        for (std::size_t i = 0; i < c.cliques.size(); ++i) {
            if (i) s += ", ";
            s += "{";
            for (std::size_t j = 0; j < c.cliques[i].size(); ++j) {
                if (j) s += ", ";
                s += c.cliques[i][j].var + ".[";
                const auto& path = c.cliques[i][j].path;
                for (std::size_t k = 0; k < path.size(); ++k) {
                    if (k) s += ",";
                    s += path[k].first + "." + std::to_string(path[k].second);
                }
                s += "]";
            }
            s += "}";
        }
        return s + "}";
    }
    if (c.stmts.empty()) return "nosharing";
    std::string s;
    for (std::size_t i = 0; i < c.stmts.size(); ++i) {
        if (i) s += "; ";
        s += std::string(c.stmts[i].lhsDerefs, '*') + c.stmts[i].lhs + " = " +
             print_cond_expr(c.stmts[i].rhs);
    }
    return s;
}

std::string print_program(const Program& p) {
    std::ostringstream out;
    for (const auto& syn : p.types.synonyms()) {
        out << "type " << syn.name;
        for (const auto& q : syn.params) out << " " << q;
        out << " = " << print_type(syn.body) << "\n";
    }
    for (const auto& name : p.types.data_order()) {
        const DataDef* d = p.types.find_data(name);
        if (d->builtin) continue;
        out << "data " << d->name;
        for (const auto& q : d->params) out << " " << q;
        out << " =";
        for (std::size_t i = 0; i < d->constructors.size(); ++i) {
            out << (i ? " | " : " ") << d->constructors[i].name;
            for (const auto& a : d->constructors[i].argTypes) out << " " << print_data_arg(a);
        }
        out << "\n";
    }
    if (!p.funcs.empty()) out << "\n";
    for (const auto& f : p.funcs) {
        out << "fn " << f.name << "(";
        for (std::size_t i = 0; i < f.sig->formals.size(); ++i) {
            const auto& fm = f.sig->formals[i];
            out << (i ? ", " : "") << (fm.isMutable ? "!" : "") << fm.name << ": "
                << print_type(fm.type);
        }
        out << ") -> " << f.sig->resultName << ": " << print_type(f.sig->resultType) << "\n";
        // The implicit signature of an unannotated function is left implicit.
        if (f.sig->key != "pure") {
            out << "  pre " << print_cond(f.sig->pre) << "\n";
            out << "  post " << print_cond(f.sig->post) << "\n";
        }
        out << "{\n";
        print_stats(out, f.body, 2);
        out << "}\n\n";
    }
    return out.str();
}

} // namespace pawns
