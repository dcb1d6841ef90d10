#include "hornce/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <unordered_map>

namespace hornce {

namespace {

struct Interner {
    std::mutex mu;
    std::deque<std::string> names;
    std::unordered_map<std::string, Sym> ids;
};

Interner &interner() {
    static Interner in;
    return in;
}

}  // namespace

Sym intern(std::string_view name) {
    Interner &in = interner();
    std::lock_guard<std::mutex> lock(in.mu);
    auto it = in.ids.find(std::string(name));
    if (it != in.ids.end()) return it->second;
    Sym id = static_cast<Sym>(in.names.size());
    in.names.emplace_back(name);
    in.ids.emplace(in.names.back(), id);
    return id;
}

const std::string &sym_name(Sym s) {
    Interner &in = interner();
    std::lock_guard<std::mutex> lock(in.mu);
    return in.names.at(static_cast<size_t>(s));
}

std::string role_str(Role r) {
    if (is_inv(r)) return "inv(" + sym_name(role_name(r)) + ")";
    return sym_name(role_name(r));
}

void set_insert(std::vector<int> &s, int x) {
    auto it = std::lower_bound(s.begin(), s.end(), x);
    if (it == s.end() || *it != x) s.insert(it, x);
}

bool set_has(const std::vector<int> &s, int x) { return std::binary_search(s.begin(), s.end(), x); }

bool set_subset(const std::vector<int> &a, const std::vector<int> &b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::vector<int> set_union(const std::vector<int> &a, const std::vector<int> &b) {
    std::vector<int> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::vector<int> set_inter(const std::vector<int> &a, const std::vector<int> &b) {
    std::vector<int> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::vector<int> set_minus(const std::vector<int> &a, const std::vector<int> &b) {
    std::vector<int> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

void set_normalize(std::vector<int> &s) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
}

std::string names_str(const SymSet &s) {
    std::vector<std::string> v;
    for (Sym x : s) v.push_back(sym_name(x));
    std::sort(v.begin(), v.end());
    std::string out = "{";
    for (size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
    return out + "}";
}

std::string roles_str(const RoleSet &s) {
    std::vector<std::string> v;
    for (Role x : s) v.push_back(role_str(x));
    std::sort(v.begin(), v.end());
    std::string out = "{";
    for (size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
    return out + "}";
}

ParseError::ParseError(const std::string &msg, int line, int col)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg),
      line(line), col(col) {}

ProfileError::ProfileError(const std::string &msg, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line(line) {}

CPtr c_top() { return std::make_shared<Concept>(Concept{CKind::Top}); }
CPtr c_bot() { return std::make_shared<Concept>(Concept{CKind::Bot}); }
CPtr c_name(Sym a) { return std::make_shared<Concept>(Concept{CKind::Name, a}); }
CPtr c_not(CPtr c) { return std::make_shared<Concept>(Concept{CKind::Not, -1, -1, std::move(c)}); }
CPtr c_and(CPtr x, CPtr y) { return std::make_shared<Concept>(Concept{CKind::And, -1, -1, std::move(x), std::move(y)}); }
CPtr c_or(CPtr x, CPtr y) { return std::make_shared<Concept>(Concept{CKind::Or, -1, -1, std::move(x), std::move(y)}); }
CPtr c_some(Role r, CPtr c) { return std::make_shared<Concept>(Concept{CKind::Exists, -1, r, std::move(c)}); }
CPtr c_only(Role r, CPtr c) { return std::make_shared<Concept>(Concept{CKind::Forall, -1, r, std::move(c)}); }

namespace {

// Precedence: or = 1, and = 2, prefix operators and atoms = 3.
void print_rec(const CPtr &c, int ctx, std::string &out) {
    switch (c->kind) {
    case CKind::Top: out += "top"; return;
    case CKind::Bot: out += "bot"; return;
    case CKind::Name: out += sym_name(c->name); return;
    case CKind::Not:
        out += "not ";
        print_rec(c->a, 3, out);
        return;
    case CKind::Exists:
    case CKind::Forall:
        out += c->kind == CKind::Exists ? "some " : "only ";
        out += role_str(c->role) + " ";
        print_rec(c->a, 3, out);
        return;
    case CKind::And:
    case CKind::Or: {
        int prec = c->kind == CKind::Or ? 1 : 2;
        bool paren = ctx > prec;
        if (paren) out += "(";
        print_rec(c->a, prec, out);
        out += c->kind == CKind::Or ? " or " : " and ";
        print_rec(c->b, prec + 1, out);
        if (paren) out += ")";
        return;
    }
    }
}

}  // namespace

std::string print_concept(const CPtr &c) {
    std::string out;
    print_rec(c, 1, out);
    return out;
}

bool concept_equal(const CPtr &x, const CPtr &y) {
    if (x->kind != y->kind || x->name != y->name || x->role != y->role) return false;
    if (static_cast<bool>(x->a) != static_cast<bool>(y->a)) return false;
    if (static_cast<bool>(x->b) != static_cast<bool>(y->b)) return false;
    if (x->a && !concept_equal(x->a, y->a)) return false;
    if (x->b && !concept_equal(x->b, y->b)) return false;
    return true;
}

namespace {

enum class Tok { Ident, LParen, RParen, Comma, Arrow, Colon, End };

struct Token {
    Tok kind;
    std::string text;
    int col;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }

std::vector<Token> lex_line(std::string_view line, int lineno) {
    std::vector<Token> toks;
    size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        if (c == '#') break;
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        int col = static_cast<int>(i) + 1;
        if (ident_start(c)) {
            size_t j = i;
            while (j < line.size() && ident_char(line[j])) ++j;
            toks.push_back({Tok::Ident, std::string(line.substr(i, j - i)), col});
            i = j;
        } else if (c == '(') {
            toks.push_back({Tok::LParen, "(", col});
            ++i;
        } else if (c == ')') {
            toks.push_back({Tok::RParen, ")", col});
            ++i;
        } else if (c == ',') {
            toks.push_back({Tok::Comma, ",", col});
            ++i;
        } else if (c == ':') {
            toks.push_back({Tok::Colon, ":", col});
            ++i;
        } else if (c == '<' && i + 1 < line.size() && line[i + 1] == '-') {
            toks.push_back({Tok::Arrow, "<-", col});
            i += 2;
        } else {
            throw ParseError(std::string("unexpected character '") + c + "'", lineno, col);
        }
    }
    toks.push_back({Tok::End, "", static_cast<int>(line.size()) + 1});
    return toks;
}

const std::set<std::string> &keywords() {
    static const std::set<std::string> k = {"top", "bot", "and", "or", "not", "some",
                                            "only", "sub", "subr", "func", "inv"};
    return k;
}

struct LineParser {
    std::vector<Token> toks;
    size_t pos = 0;
    int line;

    LineParser(std::string_view text, int line) : toks(lex_line(text, line)), line(line) {}

    const Token &peek() const { return toks[pos]; }
    bool at_end() const { return toks[pos].kind == Tok::End; }
    bool peek_word(const char *w) const { return peek().kind == Tok::Ident && peek().text == w; }

    [[noreturn]] void fail(const std::string &msg) const {
        const Token &t = peek();
        std::string found = t.kind == Tok::End ? "end of line" : "'" + t.text + "'";
        throw ParseError(msg + ", found " + found, line, t.col);
    }

    void expect(Tok k, const char *what) {
        if (peek().kind != k) fail(std::string("expected ") + what);
        ++pos;
    }

    void expect_word(const char *w) {
        if (!peek_word(w)) fail(std::string("expected '") + w + "'");
        ++pos;
    }

    std::string name(const char *what) {
        if (peek().kind != Tok::Ident || keywords().count(peek().text)) fail(std::string("expected ") + what);
        return toks[pos++].text;
    }

    Role role() {
        if (peek_word("inv")) {
            ++pos;
            expect(Tok::LParen, "'('");
            Role r = role();
            expect(Tok::RParen, "')'");
            return inv(r);
        }
        return mk_role(intern(name("role name")));
    }

    CPtr concept_expr() {
        CPtr c = conj();
        while (peek_word("or")) {
            ++pos;
            c = c_or(c, conj());
        }
        return c;
    }

    CPtr conj() {
        CPtr c = unary();
        while (peek_word("and")) {
            ++pos;
            c = c_and(c, unary());
        }
        return c;
    }

    CPtr unary() {
        if (peek_word("not")) {
            ++pos;
            return c_not(unary());
        }
        if (peek_word("some") || peek_word("only")) {
            bool ex = peek().text == "some";
            ++pos;
            Role r = role();
            CPtr c = unary();
            return ex ? c_some(r, c) : c_only(r, c);
        }
        if (peek_word("top")) {
            ++pos;
            return c_top();
        }
        if (peek_word("bot")) {
            ++pos;
            return c_bot();
        }
        if (peek().kind == Tok::LParen) {
            ++pos;
            CPtr c = concept_expr();
            expect(Tok::RParen, "')'");
            return c;
        }
        return c_name(intern(name("concept")));
    }

    void done() {
        if (!at_end()) fail("unexpected trailing input");
    }
};

template <class F>
void for_each_line(std::string_view text, F f) {
    int lineno = 0;
    size_t start = 0;
    while (start <= text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        ++lineno;
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        f(line, lineno);
        if (end == text.size()) break;
        start = end + 1;
    }
}

bool blank(std::string_view line) {
    for (char c : line) {
        if (c == '#') return true;
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

void collect_names(const CPtr &c, SymSet &concepts, SymSet &roles) {
    if (c->kind == CKind::Name) set_insert(concepts, c->name);
    if (c->role >= 0) set_insert(roles, role_name(c->role));
    if (c->a) collect_names(c->a, concepts, roles);
    if (c->b) collect_names(c->b, concepts, roles);
}

}  // namespace

TBox parse_tbox(std::string_view text) {
    TBox t;
    for_each_line(text, [&](std::string_view line, int lineno) {
        if (blank(line)) return;
        LineParser p(line, lineno);
        if (p.peek_word("func")) {
            ++p.pos;
            p.expect(Tok::LParen, "'('");
            Role r = p.role();
            p.expect(Tok::RParen, "')'");
            p.done();
            if (std::find(t.funcs.begin(), t.funcs.end(), r) == t.funcs.end()) t.funcs.push_back(r);
            return;
        }
        // Role inclusions start with a role followed by 'subr'.
        size_t save = p.pos;
        bool is_ri = false;
        if (p.peek().kind == Tok::Ident && !keywords().count(p.peek().text)) {
            is_ri = p.toks.size() > 2 && p.toks[1].kind == Tok::Ident && p.toks[1].text == "subr";
        } else if (p.peek_word("inv")) {
            int depth = 0;
            size_t i = 1;
            for (; i < p.toks.size(); ++i) {
                if (p.toks[i].kind == Tok::LParen) ++depth;
                if (p.toks[i].kind == Tok::RParen && --depth == 0) break;
            }
            is_ri = i + 1 < p.toks.size() && p.toks[i + 1].kind == Tok::Ident && p.toks[i + 1].text == "subr";
        }
        if (is_ri) {
            Role r = p.role();
            p.expect_word("subr");
            Role s = p.role();
            p.done();
            t.ris.push_back({r, s, lineno});
            return;
        }
        p.pos = save;
        CPtr l = p.concept_expr();
        p.expect_word("sub");
        CPtr r = p.concept_expr();
        p.done();
        t.cis.push_back({l, r, lineno});
    });
    return t;
}

std::string print_tbox(const TBox &t) {
    std::string out;
    for (const CI &ci : t.cis) out += print_concept(ci.lhs) + " sub " + print_concept(ci.rhs) + "\n";
    for (const RI &ri : t.ris) out += role_str(ri.sub) + " subr " + role_str(ri.sup) + "\n";
    for (Role r : t.funcs) out += "func(" + role_str(r) + ")\n";
    return out;
}

SymSet TBox::concept_names() const {
    SymSet c, r;
    for (const CI &ci : cis) {
        collect_names(ci.lhs, c, r);
        collect_names(ci.rhs, c, r);
    }
    return c;
}

SymSet TBox::role_names() const {
    SymSet c, r;
    for (const CI &ci : cis) {
        collect_names(ci.lhs, c, r);
        collect_names(ci.rhs, c, r);
    }
    for (const RI &ri : ris) {
        set_insert(r, role_name(ri.sub));
        set_insert(r, role_name(ri.sup));
    }
    for (Role f : funcs) set_insert(r, role_name(f));
    return r;
}

namespace {

bool is_el(const CPtr &c) {
    switch (c->kind) {
    case CKind::Top:
    case CKind::Bot:
    case CKind::Name: return true;
    case CKind::And: return is_el(c->a) && is_el(c->b);
    case CKind::Exists: return is_el(c->a);
    default: return false;
    }
}

bool is_left(const CPtr &c) {
    switch (c->kind) {
    case CKind::Top:
    case CKind::Bot:
    case CKind::Name: return true;
    case CKind::And:
    case CKind::Or: return is_left(c->a) && is_left(c->b);
    case CKind::Exists: return is_left(c->a);
    default: return false;
    }
}

bool is_right(const CPtr &c) {
    switch (c->kind) {
    case CKind::Top:
    case CKind::Bot:
    case CKind::Name: return true;
    case CKind::Not: return is_left(c->a);
    case CKind::And: return is_right(c->a) && is_right(c->b);
    case CKind::Or:
        return (c->a->kind == CKind::Not && is_left(c->a->a) && is_right(c->b)) ||
               (c->b->kind == CKind::Not && is_left(c->b->a) && is_right(c->a));
    case CKind::Exists:
    case CKind::Forall: return is_right(c->a);
    }
    return false;
}

}  // namespace

void check_profile(const TBox &t, Profile p) {
    for (const CI &ci : t.cis) {
        if (p == Profile::ELHIFbot) {
            if (!is_el(ci.lhs) || !is_el(ci.rhs))
                throw ProfileError("concept inclusion is not an ELI-bot inclusion: " + print_concept(ci.lhs) +
                                       " sub " + print_concept(ci.rhs),
                                   ci.line);
        } else {
            if (!is_left(ci.lhs))
                throw ProfileError("left-hand side is not Horn: " + print_concept(ci.lhs), ci.line);
            if (!is_right(ci.rhs))
                throw ProfileError("right-hand side is not Horn: " + print_concept(ci.rhs), ci.line);
        }
    }
}

bool in_profile(const TBox &t, Profile p) {
    try {
        check_profile(t, p);
        return true;
    } catch (const ProfileError &) {
        return false;
    }
}

std::vector<std::string> tbox_warnings(const TBox &t) {
    std::set<std::pair<Role, Role>> sub;
    for (const RI &ri : t.ris) {
        sub.insert({ri.sub, ri.sup});
        sub.insert({inv(ri.sub), inv(ri.sup)});
    }
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<std::pair<Role, Role>> add;
        for (auto [a, b] : sub)
            for (auto [c, d] : sub)
                if (b == c && !sub.count({a, d})) add.push_back({a, d});
        for (auto &e : add) grew |= sub.insert(e).second;
    }
    std::vector<std::string> out;
    for (Role f : t.funcs)
        for (auto [a, b] : sub)
            if (b == f && a != f)
                out.push_back("functional role " + role_str(f) + " has subrole " + role_str(a));
    return out;
}

bool tbox_subset(const TBox &t1, const TBox &t2) {
    std::set<std::string> s2;
    for (const CI &ci : t2.cis) s2.insert(print_concept(ci.lhs) + " sub " + print_concept(ci.rhs));
    for (const RI &ri : t2.ris) s2.insert(role_str(ri.sub) + " subr " + role_str(ri.sup));
    for (Role r : t2.funcs) s2.insert("func(" + role_str(r) + ")");
    for (const CI &ci : t1.cis)
        if (!s2.count(print_concept(ci.lhs) + " sub " + print_concept(ci.rhs))) return false;
    for (const RI &ri : t1.ris)
        if (!s2.count(role_str(ri.sub) + " subr " + role_str(ri.sup))) return false;
    for (Role r : t1.funcs)
        if (!s2.count("func(" + role_str(r) + ")")) return false;
    return true;
}

bool NCI::operator<(const NCI &o) const {
    return std::tie(kind, a, b, c, r) < std::tie(o.kind, o.a, o.b, o.c, o.r);
}

namespace {

class Normalizer {
public:
    explicit Normalizer(const TBox &src) {
        SymSet c, r;
        for (const CI &ci : src.cis) {
            collect_names(ci.lhs, c, r);
            collect_names(ci.rhs, c, r);
        }
        for (Sym s : c) taken_.insert(sym_name(s));
        for (Sym s : src.role_names()) taken_.insert(sym_name(s));
    }

    NormalTBox out;

    void add(const CI &ci) {
        CPtr l = simplify(ci.lhs), r = simplify(ci.rhs);
        if (r->kind == CKind::Top || l->kind == CKind::Bot) return;
        if (r->kind == CKind::And) {
            add({l, r->a, ci.line});
            add({l, r->b, ci.line});
            return;
        }
        if (l->kind == CKind::Or) {
            add({l->a, r, ci.line});
            add({l->b, r, ci.line});
            return;
        }
        if (r->kind == CKind::Name) {
            left_into(l, r->name);
        } else if (r->kind == CKind::Top) {
        } else if (r->kind == CKind::Bot && l->kind != CKind::Bot) {
            emit({NKind::SubBot, name_left(l)});
        } else if (l->kind != CKind::Bot) {
            right(name_left(l), r);
        }
    }

private:
    std::set<std::string> taken_;

    // Drops top conjuncts, bot disjuncts and repeated operands.
    static CPtr simplify(const CPtr &c) {
        switch (c->kind) {
        case CKind::And: {
            CPtr x = simplify(c->a), y = simplify(c->b);
            if (x->kind == CKind::Bot || y->kind == CKind::Bot) return c_bot();
            if (x->kind == CKind::Top || concept_equal(x, y)) return y;
            if (y->kind == CKind::Top) return x;
            return c_and(x, y);
        }
        case CKind::Or: {
            CPtr x = simplify(c->a), y = simplify(c->b);
            if (x->kind == CKind::Top || y->kind == CKind::Top) return c_top();
            if (x->kind == CKind::Bot || concept_equal(x, y)) return y;
            if (y->kind == CKind::Bot) return x;
            return c_or(x, y);
        }
        case CKind::Not: return c_not(simplify(c->a));
        case CKind::Exists: {
            CPtr x = simplify(c->a);
            return x->kind == CKind::Bot ? c_bot() : c_some(c->role, x);
        }
        case CKind::Forall: {
            CPtr x = simplify(c->a);
            return x->kind == CKind::Top ? c_top() : c_only(c->role, x);
        }
        default: return c;
        }
    }
    std::map<std::string, Sym> by_text_;
    std::set<NCI> seen_;

    void emit(NCI ci) {
        if (ci.kind == NKind::AndSub && (ci.c == ci.a || ci.c == ci.b)) return;
        if (ci.kind == NKind::AndSub && ci.a > ci.b) std::swap(ci.a, ci.b);
        if (seen_.insert(ci).second) out.cis.push_back(ci);
    }

    Sym fresh(const std::string &key) {
        auto it = by_text_.find(key);
        if (it != by_text_.end()) return it->second;
        uint64_t h = 1469598103934665603ull;
        for (unsigned char ch : key) {
            h ^= ch;
            h *= 1099511628211ull;
        }
        char buf[32];
        std::snprintf(buf, sizeof buf, "_N%08llx", static_cast<unsigned long long>(h & 0xffffffffull));
        std::string name = buf;
        for (int k = 2; taken_.count(name); ++k) name = std::string(buf) + "_" + std::to_string(k);
        taken_.insert(name);
        Sym s = intern(name);
        by_text_[key] = s;
        out.fresh[s] = key;
        return s;
    }

    // Returns a name Z with L <= Z entailed by the emitted axioms.
    Sym name_left(const CPtr &l) {
        if (l->kind == CKind::Name) return l->name;
        std::string key = "L:" + print_concept(l);
        bool known = by_text_.count(key) > 0;
        Sym z = fresh(key);
        if (!known) left_into(l, z);
        return z;
    }

    void left_into(const CPtr &l, Sym target) {
        switch (l->kind) {
        case CKind::Top: emit({NKind::TopSub, -1, -1, target}); break;
        case CKind::Bot: break;
        case CKind::Name:
            if (l->name != target) emit({NKind::AndSub, l->name, l->name, target});
            break;
        case CKind::And: emit({NKind::AndSub, name_left(l->a), name_left(l->b), target}); break;
        case CKind::Or:
            left_into(l->a, target);
            left_into(l->b, target);
            break;
        case CKind::Exists: emit({NKind::SubForall, name_left(l->a), -1, target, inv(l->role)}); break;
        default: throw ProfileError("not a left-hand concept: " + print_concept(l), 0);
        }
    }

    // Returns a name Y with Y <= R entailed by the emitted axioms.
    Sym name_right(const CPtr &r) {
        if (r->kind == CKind::Name) return r->name;
        std::string key = "R:" + print_concept(r);
        bool known = by_text_.count(key) > 0;
        Sym y = fresh(key);
        if (!known) right(y, r);
        return y;
    }

    void right(Sym x, const CPtr &r) {
        switch (r->kind) {
        case CKind::Top: break;
        case CKind::Bot: emit({NKind::SubBot, x}); break;
        case CKind::Name:
            if (r->name != x) emit({NKind::AndSub, x, x, r->name});
            break;
        case CKind::Not: {
            Sym z = name_left(r->a);
            emit({NKind::AndSub, x, z, name_right(c_bot())});
            break;
        }
        case CKind::And:
            right(x, r->a);
            right(x, r->b);
            break;
        case CKind::Or: {
            const CPtr &neg = r->a->kind == CKind::Not && is_left(r->a->a) ? r->a : r->b;
            const CPtr &pos = neg == r->a ? r->b : r->a;
            Sym z = name_left(neg->a);
            emit({NKind::AndSub, x, z, name_right(pos)});
            break;
        }
        case CKind::Exists: emit({NKind::SubExists, x, -1, name_right(r->a), r->role}); break;
        case CKind::Forall: emit({NKind::SubForall, x, -1, name_right(r->a), r->role}); break;
        }
    }
};

}  // namespace

NormalTBox normalize(const TBox &t) {
    check_profile(t, Profile::HornALCHIF);
    Normalizer n(t);
    for (const CI &ci : t.cis) n.add(ci);
    NormalTBox out = std::move(n.out);
    for (const RI &ri : t.ris)
        if (ri.sub != ri.sup) out.ris.push_back(ri);
    out.funcs = t.funcs;
    std::sort(out.funcs.begin(), out.funcs.end());
    out.funcs.erase(std::unique(out.funcs.begin(), out.funcs.end()), out.funcs.end());
    return out;
}

SymSet NormalTBox::concept_names() const {
    SymSet s;
    for (const NCI &ci : cis) {
        for (Sym x : {ci.a, ci.b, ci.c})
            if (x >= 0) set_insert(s, x);
    }
    return s;
}

SymSet NormalTBox::role_names() const {
    SymSet s;
    for (const NCI &ci : cis)
        if (ci.r >= 0) set_insert(s, role_name(ci.r));
    for (const RI &ri : ris) {
        set_insert(s, role_name(ri.sub));
        set_insert(s, role_name(ri.sup));
    }
    for (Role f : funcs) set_insert(s, role_name(f));
    return s;
}

TBox to_tbox(const NormalTBox &t) {
    TBox out;
    for (const NCI &ci : t.cis) {
        switch (ci.kind) {
        case NKind::TopSub: out.cis.push_back({c_top(), c_name(ci.c)}); break;
        case NKind::SubBot: out.cis.push_back({c_name(ci.a), c_bot()}); break;
        case NKind::AndSub: out.cis.push_back({c_and(c_name(ci.a), c_name(ci.b)), c_name(ci.c)}); break;
        case NKind::SubExists: out.cis.push_back({c_name(ci.a), c_some(ci.r, c_name(ci.c))}); break;
        case NKind::SubForall: out.cis.push_back({c_name(ci.a), c_only(ci.r, c_name(ci.c))}); break;
        }
    }
    out.ris = t.ris;
    out.funcs = t.funcs;
    return out;
}

std::string print_nci(const NCI &ci) {
    switch (ci.kind) {
    case NKind::TopSub: return "top sub " + sym_name(ci.c);
    case NKind::SubBot: return sym_name(ci.a) + " sub bot";
    case NKind::AndSub: return sym_name(ci.a) + " and " + sym_name(ci.b) + " sub " + sym_name(ci.c);
    case NKind::SubExists: return sym_name(ci.a) + " sub some " + role_str(ci.r) + " " + sym_name(ci.c);
    case NKind::SubForall: return sym_name(ci.a) + " sub only " + role_str(ci.r) + " " + sym_name(ci.c);
    }
    return "";
}

std::string print_normal(const NormalTBox &t) { return print_tbox(to_tbox(t)); }

SymSet ABox::individuals() const {
    SymSet s;
    for (const auto &c : concepts) set_insert(s, c.ind);
    for (const auto &r : roles) {
        set_insert(s, r.a);
        set_insert(s, r.b);
    }
    return s;
}

bool ABox::tree_shaped() const {
    SymSet inds = individuals();
    std::set<std::pair<Sym, Sym>> pairs;
    for (const auto &r : roles) {
        if (r.a == r.b) return false;
        auto key = std::minmax(r.a, r.b);
        if (!pairs.insert(key).second) return false;
    }
    if (inds.empty()) return true;
    if (pairs.size() + 1 != inds.size()) return false;
    std::map<Sym, Sym> parent;
    for (Sym i : inds) parent[i] = i;
    std::function<Sym(Sym)> find = [&](Sym x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (auto [a, b] : pairs) {
        Sym ra = find(a), rb = find(b);
        if (ra == rb) return false;
        parent[ra] = rb;
    }
    return true;
}

void ABox::canonicalize() {
    auto ckey = [](const ConceptAssertion &x) { return std::make_pair(x.ind, x.cname); };
    std::sort(concepts.begin(), concepts.end(), [&](auto &x, auto &y) { return ckey(x) < ckey(y); });
    concepts.erase(std::unique(concepts.begin(), concepts.end(),
                               [&](auto &x, auto &y) { return ckey(x) == ckey(y); }),
                   concepts.end());
    auto rkey = [](const RoleAssertion &x) { return std::make_tuple(x.a, x.b, x.role); };
    std::sort(roles.begin(), roles.end(), [&](auto &x, auto &y) { return rkey(x) < rkey(y); });
    roles.erase(std::unique(roles.begin(), roles.end(), [&](auto &x, auto &y) { return rkey(x) == rkey(y); }),
                roles.end());
}

ABox parse_abox(std::string_view text) {
    ABox a;
    for_each_line(text, [&](std::string_view line, int lineno) {
        if (blank(line)) return;
        LineParser p(line, lineno);
        bool inverted = false;
        Sym pred;
        if (p.peek_word("inv")) {
            ++p.pos;
            p.expect(Tok::LParen, "'('");
            pred = intern(p.name("role name"));
            p.expect(Tok::RParen, "')'");
            inverted = true;
        } else {
            pred = intern(p.name("concept or role name"));
        }
        p.expect(Tok::LParen, "'('");
        Sym x = intern(p.name("individual"));
        if (p.peek().kind == Tok::Comma) {
            ++p.pos;
            Sym y = intern(p.name("individual"));
            p.expect(Tok::RParen, "')'");
            p.done();
            if (inverted) std::swap(x, y);
            a.roles.push_back({pred, x, y});
        } else {
            if (inverted) p.fail("expected ','");
            p.expect(Tok::RParen, "')'");
            p.done();
            a.concepts.push_back({pred, x});
        }
    });
    return a;
}

std::string print_abox(const ABox &a) {
    std::string out;
    for (const auto &c : a.concepts) out += sym_name(c.cname) + "(" + sym_name(c.ind) + ")\n";
    for (const auto &r : a.roles) out += sym_name(r.role) + "(" + sym_name(r.a) + "," + sym_name(r.b) + ")\n";
    return out;
}

std::vector<Sym> CQ::vars() const {
    std::vector<Sym> v = answer;
    for (const Atom &at : atoms) {
        if (std::find(v.begin(), v.end(), at.x) == v.end()) v.push_back(at.x);
        if (at.is_role && std::find(v.begin(), v.end(), at.y) == v.end()) v.push_back(at.y);
    }
    return v;
}

bool CQ::weakly_tree_shaped() const {
    std::vector<Sym> vs = vars();
    std::set<std::pair<Sym, Sym>> pairs;
    for (const Atom &at : atoms) {
        if (!at.is_role) continue;
        if (at.x == at.y) return false;
        pairs.insert(std::minmax(at.x, at.y));
    }
    std::map<Sym, Sym> parent;
    for (Sym v : vs) parent[v] = v;
    std::function<Sym(Sym)> find = [&](Sym x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (auto [a, b] : pairs) {
        Sym ra = find(a), rb = find(b);
        if (ra == rb) return false;
        parent[ra] = rb;
    }
    return true;
}

bool CQ::tree_shaped() const {
    if (!weakly_tree_shaped()) return false;
    std::set<std::pair<Sym, Sym>> pairs;
    for (const Atom &at : atoms)
        if (at.is_role && !pairs.insert(std::minmax(at.x, at.y)).second) return false;
    return true;
}

bool CQ::is_1t() const {
    if (answer.size() > 1 || !tree_shaped()) return false;
    std::vector<Sym> vs = vars();
    if (vs.empty()) return true;
    std::set<std::pair<Sym, Sym>> pairs;
    for (const Atom &at : atoms)
        if (at.is_role) pairs.insert(std::minmax(at.x, at.y));
    if (pairs.size() + 1 != vs.size()) return false;
    // Root at the answer variable (or the first variable); every role atom must point away from it.
    Sym root = answer.empty() ? vs[0] : answer[0];
    std::map<Sym, Sym> par;
    std::vector<Sym> stack = {root};
    std::set<Sym> seen = {root};
    while (!stack.empty()) {
        Sym u = stack.back();
        stack.pop_back();
        for (auto [a, b] : pairs) {
            Sym w = a == u ? b : b == u ? a : -1;
            if (w < 0 || seen.count(w)) continue;
            seen.insert(w);
            par[w] = u;
            stack.push_back(w);
        }
    }
    for (const Atom &at : atoms)
        if (at.is_role && !(par.count(at.y) && par[at.y] == at.x)) return false;
    return true;
}

CQ parse_cq(std::string_view text) {
    CQ q;
    bool seen = false;
    for_each_line(text, [&](std::string_view line, int lineno) {
        if (blank(line)) return;
        if (seen) throw ParseError("only one query per input", lineno, 1);
        seen = true;
        LineParser p(line, lineno);
        p.name("query name");
        p.expect(Tok::LParen, "'('");
        if (p.peek().kind != Tok::RParen) {
            while (true) {
                Sym v = intern(p.name("variable"));
                if (std::find(q.answer.begin(), q.answer.end(), v) != q.answer.end())
                    p.fail("repeated answer variable");
                q.answer.push_back(v);
                if (p.peek().kind != Tok::Comma) break;
                ++p.pos;
            }
        }
        p.expect(Tok::RParen, "')'");
        p.expect(Tok::Arrow, "'<-'");
        while (true) {
            if (p.peek_word("inv")) p.fail("inverse roles are not allowed in query atoms");
            Sym pred = intern(p.name("predicate"));
            p.expect(Tok::LParen, "'('");
            Sym x = intern(p.name("variable"));
            if (p.peek().kind == Tok::Comma) {
                ++p.pos;
                Sym y = intern(p.name("variable"));
                p.expect(Tok::RParen, "')'");
                q.atoms.push_back({true, pred, x, y});
            } else {
                p.expect(Tok::RParen, "')'");
                q.atoms.push_back({false, pred, x, -1});
            }
            if (p.peek().kind != Tok::Comma) break;
            ++p.pos;
        }
        p.done();
        std::vector<Sym> vs;
        for (const Atom &at : q.atoms) {
            vs.push_back(at.x);
            if (at.is_role) vs.push_back(at.y);
        }
        for (Sym v : q.answer)
            if (std::find(vs.begin(), vs.end(), v) == vs.end())
                throw ParseError("answer variable " + sym_name(v) + " occurs in no atom", lineno, 1);
    });
    if (!seen) throw ParseError("empty query", 1, 1);
    return q;
}

std::string print_cq(const CQ &q) {
    std::string out = "q(";
    for (size_t i = 0; i < q.answer.size(); ++i) out += (i ? "," : "") + sym_name(q.answer[i]);
    out += ") <- ";
    for (size_t i = 0; i < q.atoms.size(); ++i) {
        const Atom &at = q.atoms[i];
        if (i) out += ", ";
        out += sym_name(at.pred) + "(" + sym_name(at.x);
        if (at.is_role) out += "," + sym_name(at.y);
        out += ")";
    }
    return out;
}

Signature parse_signature(std::string_view text) {
    Signature s;
    for_each_line(text, [&](std::string_view line, int lineno) {
        if (blank(line)) return;
        LineParser p(line, lineno);
        bool roles;
        if (p.peek_word("concepts")) roles = false;
        else if (p.peek_word("roles")) roles = true;
        else p.fail("expected 'concepts:' or 'roles:'");
        ++p.pos;
        p.expect(Tok::Colon, "':'");
        while (!p.at_end()) {
            Sym x = intern(p.name("name"));
            set_insert(roles ? s.roles : s.concepts, x);
            if (p.peek().kind != Tok::Comma) break;
            ++p.pos;
        }
        p.done();
    });
    return s;
}

std::string print_signature(const Signature &s) {
    auto join = [](const SymSet &xs) {
        std::vector<std::string> v;
        for (Sym x : xs) v.push_back(sym_name(x));
        std::sort(v.begin(), v.end());
        std::string out;
        for (size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
        return out;
    };
    return "concepts: " + join(s.concepts) + "\nroles: " + join(s.roles) + "\n";
}

Signature signature_of(const NormalTBox &t) {
    Signature s;
    for (Sym c : t.concept_names())
        if (!t.is_fresh(c)) set_insert(s.concepts, c);
    s.roles = t.role_names();
    return s;
}

Signature sig_union(const Signature &a, const Signature &b) {
    return {set_union(a.concepts, b.concepts), set_union(a.roles, b.roles)};
}

}  // namespace hornce
