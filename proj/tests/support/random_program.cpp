#include "random_program.hpp"

#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <vector>

namespace pawns::testgen {

namespace {

struct GType;
using GTypePtr = std::shared_ptr<const GType>;

struct GType {
    enum Kind { Int, List, Tree, Ref } kind;
    GTypePtr elem;

    std::string text() const {
        switch (kind) {
        case Int: return "Int";
        case Tree: return "Tree";
        case List: return "List " + elem->atext();
        case Ref: return "Ref " + elem->atext();
        }
        return "?";
    }
    std::string atext() const { return elem ? "(" + text() + ")" : text(); }
};

GTypePtr mk(GType::Kind k, GTypePtr e = nullptr) { return std::make_shared<const GType>(GType{k, e}); }

const char* kPrelude = R"(data List a = Nil | Cons a (List a)
data Tree = Leaf | Node Tree Int Tree

fn set_ref(!p: Ref a, v: a) -> ret: ()
    pre nosharing
    post *p = v
{
    *!p := v
    ret = ()
}

fn id_list(xs: List Int) -> ret: List Int
    pre nosharing
    post ret = xs
{
    ret = xs
}

fn prepend(x: Int, xs: List Int) -> ret: List Int
    pre nosharing
    post ret = Cons x xs
{
    ret = Cons x xs
}

fn left(t: Tree) -> ret: Tree
    pre nosharing
    post t = Node ret n r
{
    case t {
        Leaf -> ret = Leaf
        | Node *l *n *r -> ret = *l
    }
}
)";

class Gen {
public:
    Gen(std::mt19937& rng, GenOptions o) : rng_(rng), opts_(o) {
        std::vector<GTypePtr> pool = {
            mk(GType::List, mk(GType::Int)),
            mk(GType::Tree),
            mk(GType::Ref, mk(GType::Int)),
            mk(GType::Ref, mk(GType::List, mk(GType::Int))),
            mk(GType::Ref, mk(GType::Tree)),
            mk(GType::List, mk(GType::Ref, mk(GType::Int))),
            mk(GType::Ref, mk(GType::Ref, mk(GType::Int))),
        };
        std::shuffle(pool.begin(), pool.end(), rng_);
        int n = std::uniform_int_distribution<int>(1, opts_.maxTypes)(rng_);
        for (int i = 0; i < n; ++i) types_.push_back(pool[static_cast<std::size_t>(i)]);
        // Element types are needed to build the chosen ones.
        for (std::size_t i = 0; i < types_.size(); ++i) {
            auto e = types_[i]->elem;
            while (e) {
                if (!has_type(e)) allowed_.push_back(e);
                e = e->elem;
            }
        }
        for (const auto& t : types_) allowed_.push_back(t);
    }

    std::string program() {
        std::ostringstream out;
        out << kPrelude << "\nfn main() -> ret: ()\n    pre nosharing\n    post nosharing\n{\n";
        Scope scope;
        budget_ = opts_.maxStatements - 1;
        block(scope, 1, out, true);
        out << "    ret = ()\n}\n";
        return out.str();
    }

private:
    using Scope = std::vector<std::pair<std::string, GTypePtr>>;

    bool has_type(const GTypePtr& t) const {
        for (const auto& a : allowed_)
            if (a->text() == t->text()) return true;
        return false;
    }

    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

    std::vector<std::string> vars_of(const Scope& s, const std::string& type) const {
        std::vector<std::string> out;
        for (const auto& [n, t] : s)
            if (t->text() == type) out.push_back(n);
        return out;
    }

    std::string any_of(const Scope& s, const std::string& type) {
        auto vs = vars_of(s, type);
        return vs.empty() ? std::string() : vs[static_cast<std::size_t>(pick(static_cast<int>(vs.size())))];
    }

    std::string fresh() { return "v" + std::to_string(++counter_); }

    void emit(std::ostream& out, int indent, const std::string& line) {
        out << std::string(static_cast<std::size_t>(4 * indent), ' ') << line << "\n";
    }

    // Build a value of type t from what is in scope (constants where needed).
    bool construct(Scope& s, const GTypePtr& t, int indent, std::ostream& out) {
        std::string v = fresh();
        switch (t->kind) {
        case GType::Int: emit(out, indent, v + " = " + std::to_string(pick(10))); break;
        case GType::Tree: {
            std::string l = any_of(s, "Tree"), r = any_of(s, "Tree");
            if (l.empty() || r.empty() || pick(3) == 0) emit(out, indent, v + " = Leaf");
            else emit(out, indent, v + " = Node " + l + " " + std::to_string(pick(10)) + " " + r);
            break;
        }
        case GType::List: {
            std::string e = t->elem->kind == GType::Int ? std::to_string(pick(10))
                                                        : any_of(s, t->elem->text());
            std::string l = any_of(s, t->text());
            if (e.empty() || l.empty() || pick(4) == 0) emit(out, indent, v + " = Nil");
            else emit(out, indent, v + " = Cons " + e + " " + l);
            break;
        }
        case GType::Ref: {
            std::string e;
            if (t->elem->kind == GType::Int) e = std::to_string(pick(10));
            else if (t->elem->kind == GType::List && pick(3) == 0) e = "Nil";
            else if (t->elem->kind == GType::Tree && pick(3) == 0) e = "Leaf";
            else e = any_of(s, t->elem->text());
            if (e.empty()) return false;
            emit(out, indent, "*" + v + " = " + e);
            break;
        }
        }
        s.push_back({v, t});
        return true;
    }

    void block(Scope& s, int indent, std::ostream& out, bool top) {
        int n = top ? budget_ : std::min(budget_, 1 + pick(3));
        for (int i = 0; i < n && budget_ > 0; ++i) {
            --budget_;
            statement(s, indent, out);
        }
    }

    void statement(Scope& s, int indent, std::ostream& out) {
        for (int attempt = 0; attempt < 20; ++attempt) {
            int choice = pick(10);
            switch (choice) {
            case 0:
            case 1:
            case 2: {
                const auto& t = allowed_[static_cast<std::size_t>(pick(static_cast<int>(allowed_.size())))];
                if (construct(s, t, indent, out)) return;
                break;
            }
            case 3: { // v = *w
                std::vector<std::pair<std::string, GTypePtr>> refs;
                for (const auto& p : s)
                    if (p.second->kind == GType::Ref) refs.push_back(p);
                if (refs.empty()) break;
                auto [w, t] = refs[static_cast<std::size_t>(pick(static_cast<int>(refs.size())))];
                std::string v = fresh();
                emit(out, indent, v + " = *" + w);
                s.push_back({v, t->elem});
                return;
            }
            case 4: { // *!w := e
                std::vector<std::pair<std::string, GTypePtr>> refs;
                for (const auto& p : s)
                    if (p.second->kind == GType::Ref) refs.push_back(p);
                if (refs.empty()) break;
                auto [w, t] = refs[static_cast<std::size_t>(pick(static_cast<int>(refs.size())))];
                std::string e = any_of(s, t->elem->text());
                if (e.empty()) break;
                emit(out, indent, "*!" + w + " := " + e);
                return;
            }
            case 5: { // copy
                if (s.empty()) break;
                auto [w, t] = s[static_cast<std::size_t>(pick(static_cast<int>(s.size())))];
                std::string v = fresh();
                emit(out, indent, v + " = " + w);
                s.push_back({v, t});
                return;
            }
            case 6: { // case
                std::vector<std::pair<std::string, GTypePtr>> cands;
                for (const auto& p : s)
                    if (p.second->kind == GType::List || p.second->kind == GType::Tree)
                        cands.push_back(p);
                if (cands.empty() || budget_ < 2) break;
                auto [w, t] = cands[static_cast<std::size_t>(pick(static_cast<int>(cands.size())))];
                emit(out, indent, "case " + w + " {");
                if (t->kind == GType::List) {
                    emit(out, indent + 1, "Nil -> {");
                    Scope a = s;
                    block(a, indent + 2, out, false);
                    emit(out, indent + 2, "u" + std::to_string(++counter_) + " = 0");
                    emit(out, indent + 1, "}");
                    std::string h = fresh(), tl = fresh();
                    emit(out, indent + 1, "| Cons *" + h + " *" + tl + " -> {");
                    Scope b = s;
                    b.push_back({h, mk(GType::Ref, t->elem)});
                    b.push_back({tl, mk(GType::Ref, t)});
                    block(b, indent + 2, out, false);
                    emit(out, indent + 2, "u" + std::to_string(++counter_) + " = 0");
                    emit(out, indent + 1, "}");
                } else {
                    emit(out, indent + 1, "Leaf -> {");
                    Scope a = s;
                    block(a, indent + 2, out, false);
                    emit(out, indent + 2, "u" + std::to_string(++counter_) + " = 0");
                    emit(out, indent + 1, "}");
                    std::string l = fresh(), k = fresh(), r = fresh();
                    emit(out, indent + 1, "| Node *" + l + " *" + k + " *" + r + " -> {");
                    Scope b = s;
                    b.push_back({l, mk(GType::Ref, t)});
                    b.push_back({k, mk(GType::Ref, mk(GType::Int))});
                    b.push_back({r, mk(GType::Ref, t)});
                    block(b, indent + 2, out, false);
                    emit(out, indent + 2, "u" + std::to_string(++counter_) + " = 0");
                    emit(out, indent + 1, "}");
                }
                emit(out, indent, "}");
                return;
            }
            case 7: { // helper calls
                std::string l = any_of(s, "List Int");
                std::string tr = any_of(s, "Tree");
                int which = pick(4);
                std::string v = fresh();
                if (which == 0 && !l.empty()) {
                    emit(out, indent, v + " = id_list " + l);
                    s.push_back({v, mk(GType::List, mk(GType::Int))});
                    return;
                }
                if (which == 1 && !l.empty()) {
                    emit(out, indent, v + " = prepend " + std::to_string(pick(10)) + " " + l);
                    s.push_back({v, mk(GType::List, mk(GType::Int))});
                    return;
                }
                if (which == 2 && !l.empty()) {
                    // Partial application, then the call through the closure.
                    std::string g = v, v2 = fresh();
                    emit(out, indent, g + " = prepend " + std::to_string(pick(10)));
                    emit(out, indent, v2 + " = " + g + " " + l);
                    s.push_back({v2, mk(GType::List, mk(GType::Int))});
                    return;
                }
                if (which == 3 && !tr.empty()) {
                    emit(out, indent, v + " = left " + tr);
                    s.push_back({v, mk(GType::Tree)});
                    return;
                }
                break;
            }
            default: { // set_ref through a reference
                std::vector<std::pair<std::string, GTypePtr>> refs;
                for (const auto& p : s)
                    if (p.second->kind == GType::Ref) refs.push_back(p);
                if (refs.empty()) break;
                auto [w, t] = refs[static_cast<std::size_t>(pick(static_cast<int>(refs.size())))];
                std::string e = any_of(s, t->elem->text());
                if (e.empty()) break;
                emit(out, indent, fresh() + " = set_ref !" + w + " " + e);
                return;
            }
            }
        }
        const auto& t = allowed_[static_cast<std::size_t>(pick(static_cast<int>(allowed_.size())))];
        if (!construct(s, t, indent, out)) construct(s, mk(GType::Int), indent, out);
    }

    std::mt19937& rng_;
    GenOptions opts_;
    std::vector<GTypePtr> types_;
    std::vector<GTypePtr> allowed_;
    int counter_ = 0;
    int budget_ = 0;
};

} // namespace

std::string random_program(std::mt19937& rng, GenOptions opts) { return Gen(rng, opts).program(); }

} // namespace pawns::testgen
