#include "hornce/automata.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace hornce {

Sym star_sym() {
    static const Sym s = intern("*");
    return s;
}

Sym dbot_sym() {
    static const Sym s = intern("dbot");
    return s;
}

Sym broot_sym() {
    static const Sym s = intern("broot");
    return s;
}

int Alphabet::add(int comp, bool role, int sym) {
    auto key = std::make_tuple(comp, role, sym);
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    if (atoms_.size() >= static_cast<size_t>(kMaxAtoms))
        throw ResourceLimit("label alphabet exceeds " + std::to_string(kMaxAtoms) + " atoms");
    atoms_.push_back({comp, role, sym});
    int id = static_cast<int>(atoms_.size()) - 1;
    index_[key] = id;
    return id;
}

int Alphabet::find(int comp, bool role, int sym) const {
    auto it = index_.find(std::make_tuple(comp, role, sym));
    return it == index_.end() ? -1 : it->second;
}

std::vector<int> Alphabet::of(int comp, bool role) const {
    std::vector<int> out;
    for (size_t i = 0; i < atoms_.size(); ++i)
        if (atoms_[i].comp == comp && atoms_[i].role == role) out.push_back(static_cast<int>(i));
    return out;
}

std::string Alphabet::atom_str(int i) const {
    const LabelAtom &a = atoms_.at(static_cast<size_t>(i));
    return "L" + std::to_string(a.comp) + ":" + (a.role ? role_str(a.sym) : sym_name(a.sym));
}

std::string Alphabet::label_str(const Label &l) const {
    std::string out;
    for (int c = 0; c < 4; ++c) {
        std::string part;
        for (size_t i = 0; i < atoms_.size(); ++i)
            if (atoms_[i].comp == c && l[i]) {
                if (!part.empty()) part += ",";
                part += atoms_[i].role ? role_str(atoms_[i].sym) : sym_name(atoms_[i].sym);
            }
        if (c == 3 && part.empty()) continue;
        out += (c ? " " : "") + std::string("L") + std::to_string(c) + "={" + part + "}";
    }
    return out;
}

namespace {

void add_sig(Alphabet &al, int comp, const SymSet &concepts, const SymSet &role_names) {
    for (Sym a : concepts) al.add(comp, false, a);
    for (Sym r : role_names) {
        al.add(comp, true, mk_role(r));
        al.add(comp, true, mk_role(r, true));
    }
}

}  // namespace

std::shared_ptr<const Alphabet> make_alphabet(const Reasoner &R1, const Reasoner &R2, const Signature &sa,
                                              const Signature &sq) {
    auto al = std::make_shared<Alphabet>();
    add_sig(*al, 0, sa.concepts, sa.roles);
    al->add(0, false, star_sym());
    for (int i = 1; i <= 2; ++i) {
        const NormalTBox &t = (i == 1 ? R1 : R2).tbox();
        add_sig(*al, i, set_union(set_union(t.concept_names(), sa.concepts), sq.concepts),
                set_union(set_union(t.role_names(), sa.roles), sq.roles));
    }
    al->add(3, false, dbot_sym());
    al->add(3, false, broot_sym());
    return al;
}

int TwoWayAutomaton::max_count() const {
    int c = 0;
    for (const FNode &n : f)
        if (n.kind == FKind::DownEx || n.kind == FKind::DownAll) c = std::max(c, n.n);
    return c;
}

int TwoWayAutomaton::max_priority() const {
    int m = 0;
    for (int p : priority) m = std::max(m, p);
    return m;
}

int TwoWayAutomaton::state_index(const std::string &name) const {
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

AutomatonBuilder::AutomatonBuilder(std::shared_ptr<const Alphabet> alpha) { a_.alpha = std::move(alpha); }

int AutomatonBuilder::state(const std::string &name, int priority) {
    auto it = by_name_.find(name);
    if (it != by_name_.end()) return it->second;
    int id = static_cast<int>(a_.names.size());
    a_.names.push_back(name);
    a_.priority.push_back(priority);
    a_.delta.push_back(-1);
    by_name_[name] = id;
    return id;
}

void AutomatonBuilder::set(int q, int formula) { a_.delta[static_cast<size_t>(q)] = formula; }

int AutomatonBuilder::intern(FNode n) {
    auto it = memo_.find(n);
    if (it != memo_.end()) return it->second;
    int id = static_cast<int>(a_.f.size());
    a_.f.push_back(n);
    memo_[a_.f.back()] = id;
    return id;
}

int AutomatonBuilder::tt() { return intern({FKind::True, -1, -1, 0, {}}); }
int AutomatonBuilder::ff() { return intern({FKind::False, -1, -1, 0, {}}); }

int AutomatonBuilder::conj(std::vector<int> xs) {
    std::vector<int> flat;
    for (int x : xs) {
        const FNode &n = a_.f[x];
        if (n.kind == FKind::False) return ff();
        if (n.kind == FKind::True) continue;
        if (n.kind == FKind::And)
            flat.insert(flat.end(), n.kids.begin(), n.kids.end());
        else
            flat.push_back(x);
    }
    set_normalize(flat);
    if (flat.empty()) return tt();
    if (flat.size() == 1) return flat[0];
    return intern({FKind::And, -1, -1, 0, flat});
}

int AutomatonBuilder::disj(std::vector<int> xs) {
    std::vector<int> flat;
    for (int x : xs) {
        const FNode &n = a_.f[x];
        if (n.kind == FKind::True) return tt();
        if (n.kind == FKind::False) continue;
        if (n.kind == FKind::Or)
            flat.insert(flat.end(), n.kids.begin(), n.kids.end());
        else
            flat.push_back(x);
    }
    set_normalize(flat);
    if (flat.empty()) return ff();
    if (flat.size() == 1) return flat[0];
    return intern({FKind::Or, -1, -1, 0, flat});
}

int AutomatonBuilder::ite(int atom, int yes, int no) {
    if (yes == no) return yes;
    return intern({FKind::Ite, atom, -1, 0, {yes, no}});
}

int AutomatonBuilder::here(int q) { return intern({FKind::Here, -1, q, 0, {}}); }
int AutomatonBuilder::up_ex(int q) { return intern({FKind::UpEx, -1, q, 0, {}}); }
int AutomatonBuilder::up_all(int q) { return intern({FKind::UpAll, -1, q, 0, {}}); }
int AutomatonBuilder::dia(int n, int q) { return n <= 0 ? tt() : intern({FKind::DownEx, -1, q, n, {}}); }
int AutomatonBuilder::box(int n, int q) { return intern({FKind::DownAll, -1, q, n, {}}); }

TwoWayAutomaton AutomatonBuilder::finish() {
    for (size_t q = 0; q < a_.delta.size(); ++q)
        if (a_.delta[q] < 0) throw std::logic_error("state without transition: " + a_.names[q]);
    return a_;
}

namespace {

void print_formula(const TwoWayAutomaton &a, int id, const Label *l, std::string &out) {
    const FNode &n = a.f[static_cast<size_t>(id)];
    auto st = [&](const char *op) { out += std::string("(") + op + " " + a.names[n.state] + ")"; };
    switch (n.kind) {
    case FKind::True: out += "true"; break;
    case FKind::False: out += "false"; break;
    case FKind::And:
    case FKind::Or:
        out += n.kind == FKind::And ? "(and" : "(or";
        for (int k : n.kids) {
            out += " ";
            print_formula(a, k, l, out);
        }
        out += ")";
        break;
    case FKind::Ite:
        if (l) {
            print_formula(a, (*l)[n.atom] ? n.kids[0] : n.kids[1], l, out);
            break;
        }
        out += "(if " + a.alpha->atom_str(n.atom) + " ";
        print_formula(a, n.kids[0], l, out);
        out += " ";
        print_formula(a, n.kids[1], l, out);
        out += ")";
        break;
    case FKind::Here: st("here"); break;
    case FKind::UpEx: st("up-must"); break;
    case FKind::UpAll: st("up-may"); break;
    case FKind::DownEx:
        out += "(down-exists " + std::to_string(n.n) + " " + a.names[n.state] + ")";
        break;
    case FKind::DownAll:
        out += "(down-all-but " + std::to_string(n.n) + " " + a.names[n.state] + ")";
        break;
    }
}

}  // namespace

std::string formula_str(const TwoWayAutomaton &a, int formula) {
    std::string out;
    print_formula(a, formula, nullptr, out);
    return out;
}

std::string residual_str(const TwoWayAutomaton &a, int formula, const Label &l) {
    std::string out;
    print_formula(a, formula, &l, out);
    return out;
}

std::string dump(const TwoWayAutomaton &a) {
    std::ostringstream os;
    os << "automaton states " << a.num_states() << " initial " << a.names[a.initial] << " max-priority "
       << a.max_priority() << " max-count " << a.max_count();
    if (a.k) os << " k " << a.k;
    os << "\n";
    for (size_t q = 0; q < a.num_states(); ++q)
        os << "state " << a.names[q] << " priority " << a.priority[q] << "\n  "
           << formula_str(a, a.delta[q]) << "\n";
    return os.str();
}

AutomataContext make_context(const Reasoner &R1, const Reasoner &R2, const Signature &sa, const Signature &sq) {
    return AutomataContext{R1, R2, sa, sq, make_alphabet(R1, R2, sa, sq)};
}

namespace {

std::vector<int> syms_of(const Alphabet &al, const std::vector<int> &atoms) {
    std::vector<int> out;
    for (int i : atoms) out.push_back(al.atoms()[i].sym);
    return out;
}

// L0 is empty.
int l0_empty(AutomatonBuilder &b, const Alphabet &al) {
    std::vector<int> xs;
    for (int i : al.of(0, false)) xs.push_back(b.nlit(i));
    for (int i : al.of(0, true)) xs.push_back(b.nlit(i));
    return b.conj(xs);
}

int l0_nonempty(AutomatonBuilder &b, const Alphabet &al) {
    std::vector<int> xs;
    for (int i : al.of(0, false)) xs.push_back(b.lit(i));
    for (int i : al.of(0, true)) xs.push_back(b.lit(i));
    return b.disj(xs);
}

std::string cname(Sym a) { return sym_name(a); }

// Subsets of 'pool' that are minimal with property p, by increasing size.
std::vector<SymSet> minimal_subsets(const SymSet &pool, const std::function<bool(const SymSet &)> &p) {
    if (pool.size() > 16) throw ResourceLimit("too many concept names for subset enumeration");
    std::vector<uint32_t> found;
    std::vector<SymSet> out;
    size_t n = pool.size();
    std::vector<uint32_t> masks;
    for (uint32_t m = 0; m < (1u << n); ++m) masks.push_back(m);
    std::stable_sort(masks.begin(), masks.end(),
                     [](uint32_t x, uint32_t y) { return __builtin_popcount(x) < __builtin_popcount(y); });
    for (uint32_t m : masks) {
        bool sup = false;
        for (uint32_t f : found)
            if ((f & m) == f) {
                sup = true;
                break;
            }
        if (sup) continue;
        SymSet s;
        for (size_t i = 0; i < n; ++i)
            if ((m >> i) & 1u) s.push_back(pool[i]);
        if (p(s)) {
            found.push_back(m);
            out.push_back(s);
        }
    }
    return out;
}

RoleSet q_part(const RoleSet &rho, const Signature &q) {
    RoleSet out;
    for (Role r : rho)
        if (q.has_role_any(r)) out.push_back(r);
    return out;
}

}  // namespace

TwoWayAutomaton build_A1(const AutomataContext &c) {
    const Alphabet &al = *c.alpha;
    AutomatonBuilder b(c.alpha);
    int init = b.state("a0");
    int a1 = b.state("a1", 1);
    int ae = b.state("ae");
    std::vector<int> roles = al.of(0, true);
    std::vector<int> no_role;
    for (int r : roles) no_role.push_back(b.nlit(r));
    b.set(init, b.conj({l0_nonempty(b, al), b.conj(no_role), b.box(0, a1)}));
    std::vector<int> one;
    for (int r : roles) {
        std::vector<int> xs = {b.lit(r)};
        for (int s : roles)
            if (s != r) xs.push_back(b.nlit(s));
        one.push_back(b.conj(xs));
    }
    int star = al.concept_atom(0, star_sym());
    b.set(a1, b.disj({b.conj({l0_empty(b, al), b.box(0, ae)}),
                      b.conj({b.disj(one), b.nlit(star), b.box(0, a1)})}));
    b.set(ae, b.conj({l0_empty(b, al), b.box(0, ae)}));
    b.set_initial(init);
    return b.finish();
}

TwoWayAutomaton build_A2(const AutomataContext &c) {
    const Alphabet &al = *c.alpha;
    const Reasoner &R = c.R1;
    const NormalTBox &T = R.tbox();
    AutomatonBuilder b(c.alpha);
    int q0 = b.state("q0");
    int qA = b.state("q_Amc");

    auto c_atom = [&](Sym a) { return al.concept_atom(1, a); };
    auto r_atom = [&](Role r) { return al.role_atom(1, r); };
    auto qc = [&](Sym a, bool neg) {
        int q = b.state(std::string(neg ? "qbar_" : "q_") + cname(a));
        if (!b.defined(q)) b.set(q, neg ? b.nlit(c_atom(a)) : b.lit(c_atom(a)));
        return q;
    };
    auto qr = [&](Role r, bool neg) {
        int q = b.state(std::string(neg ? "qbar_" : "q_") + role_str(r));
        if (!b.defined(q)) b.set(q, neg ? b.nlit(r_atom(r)) : b.lit(r_atom(r)));
        return q;
    };
    // q_{r,B} family.
    auto qrb = [&](Role r, Sym B, bool neg) {
        std::string tag = role_str(r) + "," + cname(B);
        int down = b.state((neg ? "qbar_down_" : "q_down_") + tag);
        int q = b.state((neg ? "qbar_" : "q_") + tag);
        if (!b.defined(q)) {
            if (!neg) {
                b.set(down, b.conj({b.here(qr(r, false)), b.here(qc(B, false))}));
                b.set(q, b.disj({b.dia(1, down), b.conj({b.here(qr(inv(r), false)), b.up_ex(qc(B, false))})}));
            } else {
                b.set(down, b.disj({b.here(qr(r, true)), b.here(qc(B, true))}));
                b.set(q, b.conj({b.box(0, down), b.disj({b.here(qr(inv(r), true)), b.up_all(qc(B, true))})}));
            }
        }
        return q;
    };

    std::vector<int> top = {b.box(0, q0), b.here(qA)};
    int idx = 0;
    for (const NCI &ci : T.cis) {
        int q = b.state("q_ax" + std::to_string(idx++) + "[" + print_nci(ci) + "]");
        int f = b.tt();
        switch (ci.kind) {
        case NKind::TopSub: f = b.here(qc(ci.c, false)); break;
        case NKind::SubBot: f = b.here(qc(ci.a, true)); break;
        case NKind::AndSub:
            f = b.disj({b.here(qc(ci.a, true)), b.here(qc(ci.b, true)), b.here(qc(ci.c, false))});
            break;
        case NKind::SubExists: f = b.disj({b.here(qc(ci.a, true)), b.here(qrb(ci.r, ci.c, false))}); break;
        case NKind::SubForall: f = b.disj({b.here(qc(ci.c, false)), b.here(qrb(inv(ci.r), ci.a, true))}); break;
        }
        b.set(q, f);
        top.push_back(b.here(q));
    }
    // Role inclusions closed under inversion.
    std::set<std::pair<Role, Role>> ris;
    for (const RI &ri : T.ris) {
        ris.insert({ri.sub, ri.sup});
        ris.insert({inv(ri.sub), inv(ri.sup)});
    }
    for (auto [r, s] : ris) {
        int q = b.state("q_ri[" + role_str(r) + "<" + role_str(s) + "]");
        b.set(q, b.disj({b.here(qr(r, true)), b.here(qr(s, false))}));
        top.push_back(b.here(q));
    }
    for (Role f : T.funcs) {
        int q = b.state("q_func[" + role_str(f) + "]");
        b.set(q, b.disj({b.conj({b.here(qr(inv(f), false)), b.box(0, qr(f, true))}),
                         b.conj({b.here(qr(inv(f), true)), b.box(1, qr(f, true))})}));
        top.push_back(b.here(q));
    }
    b.set(q0, b.conj(top));

    std::vector<int> amc;
    for (int i : al.of(0, false)) {
        Sym a = al.atoms()[i].sym;
        if (a == star_sym()) continue;
        amc.push_back(b.ite(i, b.here(qc(a, false)), b.tt()));
    }
    for (int i : al.of(0, true)) amc.push_back(b.ite(i, b.here(qr(al.atoms()[i].sym, false)), b.tt()));
    b.set(qA, b.conj(amc));
    // States q_rho and their negations for every symbol of Theta_1.
    for (int i : al.of(1, false)) {
        qc(al.atoms()[i].sym, false);
        qc(al.atoms()[i].sym, true);
    }
    for (int i : al.of(1, true)) {
        qr(al.atoms()[i].sym, false);
        qr(al.atoms()[i].sym, true);
    }
    b.set_initial(q0);
    return b.finish();
}

namespace {

// Dual formula: and/or, exists/all-but, up-must/up-may and true/false swapped; states mapped by bar.
int dualize(AutomatonBuilder &b, int f, const std::function<int(int)> &bar) {
    const FNode n = b.node(f);
    switch (n.kind) {
    case FKind::True: return b.ff();
    case FKind::False: return b.tt();
    case FKind::And:
    case FKind::Or: {
        std::vector<int> xs;
        for (int k : n.kids) xs.push_back(dualize(b, k, bar));
        return n.kind == FKind::And ? b.disj(xs) : b.conj(xs);
    }
    case FKind::Ite: return b.ite(n.atom, dualize(b, n.kids[0], bar), dualize(b, n.kids[1], bar));
    case FKind::Here: return b.here(bar(n.state));
    case FKind::UpEx: return b.up_all(bar(n.state));
    case FKind::UpAll: return b.up_ex(bar(n.state));
    case FKind::DownEx: return b.box(n.n - 1, bar(n.state));
    case FKind::DownAll: return b.dia(n.n + 1, bar(n.state));
    }
    return b.ff();
}

}  // namespace

TwoWayAutomaton build_A3(const AutomataContext &c) {
    const Alphabet &al = *c.alpha;
    const Reasoner &R = c.R2;
    const NormalTBox &T = R.tbox();
    AutomatonBuilder b(c.alpha);
    int init = b.state("init");
    int q0 = b.state("q0");
    int q0p = b.state("q0'");
    int q1 = b.state("q1");

    std::vector<int> nc2 = al.of(2, false), nr2 = al.of(2, true), r0 = al.of(0, true);
    SymSet concepts = syms_of(al, nc2);
    std::vector<Role> roles0 = syms_of(al, r0);

    auto qA = [&](Sym a) { return b.state("q_" + cname(a), 1); };
    auto qAbar = [&](Sym a) { return b.state("qbar_" + cname(a)); };
    auto qAmc = [&](Role s) {
        int q = b.state("q_abox_" + role_str(s));
        if (!b.defined(q)) b.set(q, b.lit(al.role_atom(0, s)));
        return q;
    };
    auto qsb = [&](Role s, Sym B) {
        int q = b.state("q_" + role_str(s) + "," + cname(B));
        if (!b.defined(q)) {
            b.set(q, b.conj({b.here(qAmc(s)), b.here(qA(B))}));
        }
        return q;
    };

    b.set(init, b.conj({b.here(q0), b.here(q1)}));
    b.set(q0, b.disj({l0_empty(b, al), b.conj({l0_nonempty(b, al), b.here(q0p)})}));

    std::vector<int> cons;
    for (const SymSet &m : minimal_subsets(concepts, [&](const SymSet &s) { return !R.consistent(s); })) {
        std::vector<int> xs;
        for (Sym a : m) xs.push_back(b.nlit(al.concept_atom(2, a)));
        cons.push_back(b.disj(xs));
    }
    std::vector<int> body = {b.conj(cons), b.box(0, q0), b.box(0, q1)};
    for (Sym a : concepts) body.push_back(b.ite(al.concept_atom(2, a), b.here(qA(a)), b.here(qAbar(a))));
    b.set(q0p, b.conj(body));

    // Fork check and incoming-role conditions.
    std::vector<int> q1body;
    for (Role f : T.funcs) {
        int qneg = b.state("q_not_" + role_str(f));
        std::vector<int> below, below_inv;
        for (Role s : roles0) {
            if (R.role_sub(s, f)) below.push_back(b.nlit(al.role_atom(0, s)));
            if (R.role_sub(s, inv(f))) below_inv.push_back(b.lit(al.role_atom(0, s)));
        }
        b.set(qneg, b.conj(below));
        int qf = b.state("q_func_" + role_str(f));
        int has_parent_f = b.disj(below_inv);
        std::vector<int> none;
        for (Role s : roles0)
            if (R.role_sub(s, inv(f))) none.push_back(b.nlit(al.role_atom(0, s)));
        b.set(qf, b.disj({b.conj({has_parent_f, b.box(0, qneg)}), b.conj({b.conj(none), b.box(1, qneg)})}));
        q1body.push_back(b.here(qf));
    }
    for (int i : nr2) {
        Role r = al.atoms()[i].sym;
        int qr = b.state("q_" + role_str(r));
        int qrb = b.state("qbar_" + role_str(r));
        std::vector<int> some, none;
        for (Role s : roles0)
            if (R.role_sub(s, r)) {
                some.push_back(b.lit(al.role_atom(0, s)));
                none.push_back(b.nlit(al.role_atom(0, s)));
            }
        b.set(qr, b.disj(some));
        b.set(qrb, b.conj(none));
        q1body.push_back(b.ite(i, b.here(qr), b.here(qrb)));
    }
    b.set(q1, b.disj({l0_empty(b, al), b.conj({l0_nonempty(b, al), b.conj(q1body)})}));

    // Derivation trees.
    std::vector<Role> funcs = T.funcs;
    for (Sym a : concepts) {
        std::vector<int> ders;
        SymSet pool = concepts;
        pool.erase(std::remove(pool.begin(), pool.end(), a), pool.end());
        for (const SymSet &x : minimal_subsets(pool, [&](const SymSet &s) { return R.subsumes(s, a); })) {
            std::vector<int> xs;
            for (Sym y : x) xs.push_back(b.here(qA(y)));
            ders.push_back(b.conj(xs));
        }
        auto via = [&](Role r, Sym B) {
            for (Role s : roles0)
                if (R.role_sub(s, r))
                    ders.push_back(b.disj({b.conj({b.here(qAmc(s)), b.up_ex(qA(B))}), b.dia(1, qsb(inv(s), B))}));
        };
        for (const NCI &ci : T.cis) {
            if (ci.c != a) continue;
            if (ci.kind == NKind::SubForall) via(ci.r, ci.a);
            if (ci.kind == NKind::SubExists)
                for (Role f : funcs)
                    if (R.role_sub(ci.r, f)) via(f, ci.a);
        }
        int at0 = al.concept_atom(0, a);
        int derive = b.disj(ders);
        int f = b.conj({l0_nonempty(b, al), at0 >= 0 ? b.ite(at0, b.tt(), derive) : derive});
        b.set(qA(a), f);
    }
    // Dual states.
    std::map<int, int> bar_of;
    std::vector<int> todo;
    std::function<int(int)> bar = [&](int q) -> int {
        auto it = bar_of.find(q);
        if (it != bar_of.end()) return it->second;
        std::string nm = b.name(q);
        int qb = b.state("qbar_" + nm.substr(2));
        bar_of[q] = qb;
        bar_of[qb] = q;
        todo.push_back(q);
        return qb;
    };
    for (Sym a : concepts) bar(qA(a));
    while (!todo.empty()) {
        int q = todo.back();
        todo.pop_back();
        int qb = bar_of[q];
        if (!b.defined(qb)) b.set(qb, dualize(b, b.delta_of(q), bar));
    }
    b.set_initial(init);
    return b.finish();
}

namespace {

// Shared part of A4 and its simulation variant: states over nodes of the T2 universal models.
class A4Builder {
public:
    A4Builder(const AutomataContext &c, bool sim) : c_(c), al_(*c.alpha), b_(c.alpha), sim_(sim) {}

    TwoWayAutomaton build() {
        int q0 = b_.state("q0", 1);
        int q1 = b_.state("q1");
        std::vector<int> qroles;
        for (Role r : roles_q())
            if (al_.role_atom(2, r) >= 0 && al_.role_atom(1, r) >= 0)
                qroles.push_back(b_.conj({b_.lit(al_.role_atom(2, r)), b_.nlit(al_.role_atom(1, r))}));
        b_.set(q1, b_.disj(qroles));

        std::vector<int> nc2 = al_.of(2, false);
        if (nc2.size() > 16) throw ResourceLimit("too many T2 concept names for the type guard");
        int by_type = b_.by_set(nc2, [&](const std::vector<int> &atoms) {
            SymSet t = syms_of(al_, atoms);
            set_normalize(t);
            if (!c_.R2.consistent(t) || c_.R2.type_of(t) != t) return b_.ff();
            std::vector<int> xs = {b_.here(q2(t, {}, true))};
            if (!sim_)
                for (const SymSet &t2 : rq(t)) xs.push_back(b_.here(q3(t2)));
            return b_.disj(xs);
        });
        b_.set(q0, b_.conj({l0_nonempty(b_, al_), b_.disj({b_.dia(1, q0), b_.here(q1), by_type})}));
        while (!todo_.empty()) {
            auto [q, t, rho, root] = todo_.back();
            todo_.pop_back();
            define_q2(q, t, rho, root);
        }
        b_.set_initial(q0);
        return b_.finish();
    }

private:
    const AutomataContext &c_;
    const Alphabet &al_;
    AutomatonBuilder b_;
    bool sim_;
    std::vector<std::tuple<int, SymSet, RoleSet, bool>> todo_;
    std::map<SymSet, std::set<SymSet>> rq_;
    std::map<std::pair<SymSet, SymSet>, bool> finhom_;

    std::vector<Role> roles_q() const {
        std::vector<Role> out;
        for (Sym r : c_.sq.roles) {
            out.push_back(mk_role(r));
            out.push_back(mk_role(r, true));
        }
        return out;
    }

    const std::set<SymSet> &rq(const SymSet &t) {
        auto it = rq_.find(t);
        if (it == rq_.end()) it = rq_.emplace(t, compute_RQ(c_.R2, t, c_.sq)).first;
        return it->second;
    }

    static std::string node_tag(const SymSet &t, const RoleSet &rho, bool root) {
        return names_str(t) + (root ? "" : "@" + roles_str(rho));
    }

    // No Q-homomorphism from the subtree at node (t, rho) into I_{L,1} rooted here.
    int q2(const SymSet &t, const RoleSet &rho, bool root) {
        std::string nm = "q2bar_" + node_tag(t, rho, root);
        bool fresh = !b_.has_state(nm);
        int q = b_.state(nm, 1);
        if (fresh) todo_.emplace_back(q, t, rho, root);
        return q;
    }

    void define_q2(int q, const SymSet &t, const RoleSet &rho_in, bool root) {
        std::vector<int> xs;
        for (Sym a : t)
            if (c_.sq.has_concept(a)) xs.push_back(b_.nlit(al_.concept_atom(1, a)));
        for (const Succ &s : c_.R2.children(t, root ? RoleSet{} : rho_in)) {
            RoleSet rq = q_part(s.rho, c_.sq);
            if (rq.empty()) continue;
            if (sim_) {
                for (Role r : rq) xs.push_back(b_.here(q2_edge({r}, s)));
            } else {
                xs.push_back(b_.here(q2_edge(rq, s)));
            }
        }
        b_.set(q, b_.disj(xs));
    }

    // No neighbor reached along all roles of rho hosts the subtree at successor s.
    int q2_edge(const RoleSet &rho, const Succ &s) {
        std::string tag = roles_str(rho) + "," + node_tag(s.type, s.rho, false);
        int q = b_.state("q2bar_edge_" + tag);
        if (b_.defined(q)) return q;
        int down = b_.state("q2bar_down_" + tag);
        int target = q2(s.type, s.rho, false);
        std::vector<int> not_down = {b_.here(target)}, not_up = {b_.up_ex(target)};
        for (Role r : rho) {
            not_down.push_back(b_.nlit(al_.role_atom(1, r)));
            not_up.push_back(b_.nlit(al_.role_atom(1, inv(r))));
        }
        b_.set(down, b_.disj(not_down));
        b_.set(q, b_.conj({b_.box(0, down), b_.disj(not_up)}));
        return q;
    }

    int q3(const SymSet &t) {
        std::string nm = "q3bar_" + names_str(t);
        int q = b_.state(nm);
        if (b_.defined(q)) return q;
        int qb = b_.state("q3bbar_" + names_str(t));
        b_.set(q, b_.conj({b_.box(0, q), b_.up_all(q), b_.here(q2(t, {}, true)), b_.here(qb)}));
        std::vector<int> nc1 = al_.of(1, false);
        if (nc1.size() > 16) throw ResourceLimit("too many T1 concept names for the fin-hom guard");
        int guard = b_.by_set(nc1, [&](const std::vector<int> &atoms) {
            SymSet x = syms_of(al_, atoms);
            set_normalize(x);
            if (!c_.R1.consistent(x)) return b_.tt();
            SymSet t1 = c_.R1.type_of(x);
            auto key = std::make_pair(t, t1);
            auto it = finhom_.find(key);
            if (it == finhom_.end())
                it = finhom_.emplace(key, decide_fin_hom(c_.R1, t1, c_.R2, t, c_.sq).holds).first;
            return it->second ? b_.ff() : b_.tt();
        });
        b_.set(qb, b_.disj({l0_empty(b_, al_), guard}));
        return q;
    }
};

}  // namespace

TwoWayAutomaton build_A4(const AutomataContext &c) { return A4Builder(c, false).build(); }

TwoWayAutomaton build_A4_sim(const AutomataContext &c) { return A4Builder(c, true).build(); }

namespace {

// Copies formula f of src into dst with states shifted by off; returns the new id.
int copy_formula(const TwoWayAutomaton &src, int f, TwoWayAutomaton &dst, int off, std::map<int, int> &memo) {
    auto it = memo.find(f);
    if (it != memo.end()) return it->second;
    FNode n = src.f[static_cast<size_t>(f)];
    if (n.state >= 0) n.state += off;
    for (int &k : n.kids) k = copy_formula(src, k, dst, off, memo);
    dst.f.push_back(n);
    int id = static_cast<int>(dst.f.size()) - 1;
    memo[f] = id;
    return id;
}

}  // namespace

TwoWayAutomaton intersect(const std::vector<TwoWayAutomaton> &parts) {
    if (parts.empty()) throw std::invalid_argument("intersect of no automata");
    TwoWayAutomaton out;
    out.alpha = parts[0].alpha;
    out.names.push_back("init");
    out.priority.push_back(0);
    out.delta.push_back(-1);
    std::vector<int> inits;
    for (size_t i = 0; i < parts.size(); ++i) {
        const TwoWayAutomaton &p = parts[i];
        if (p.alpha != out.alpha && p.alpha->size() != out.alpha->size())
            throw std::invalid_argument("intersect over different alphabets");
        int off = static_cast<int>(out.names.size());
        std::map<int, int> memo;
        for (size_t q = 0; q < p.num_states(); ++q) {
            out.names.push_back(std::to_string(i + 1) + "." + p.names[q]);
            out.priority.push_back(p.priority[q]);
            out.delta.push_back(-1);
        }
        for (size_t q = 0; q < p.num_states(); ++q)
            out.delta[off + q] = copy_formula(p, p.delta[q], out, off, memo);
        inits.push_back(out.delta[off + p.initial]);
        out.k = std::max(out.k, p.k);
    }
    out.f.push_back({FKind::And, -1, -1, 0, inits});
    out.delta[0] = static_cast<int>(out.f.size()) - 1;
    out.initial = 0;
    return out;
}

TwoWayAutomaton to_2ata_k(const TwoWayAutomaton &a) {
    const Alphabet &al = *a.alpha;
    int dbot = al.concept_atom(3, dbot_sym()), broot = al.concept_atom(3, broot_sym());
    if (dbot < 0 || broot < 0) throw std::invalid_argument("alphabet lacks the k-ary markers");
    AutomatonBuilder b(a.alpha);
    int n = static_cast<int>(a.num_states());
    for (int q = 0; q < n; ++q) b.state(a.names[q], a.priority[q]);
    int q0p = b.state("k.q0'");
    int q1 = b.state("k.q1");
    int qr = b.state("k.qr");
    int qbot = b.state("k.qbot");
    std::map<int, int> memo;
    std::function<int(int)> tr = [&](int f) -> int {
        auto it = memo.find(f);
        if (it != memo.end()) return it->second;
        const FNode &x = a.f[static_cast<size_t>(f)];
        int out = 0;
        switch (x.kind) {
        case FKind::True: out = b.tt(); break;
        case FKind::False: out = b.ff(); break;
        case FKind::And:
        case FKind::Or: {
            std::vector<int> xs;
            for (int k : x.kids) xs.push_back(tr(k));
            out = x.kind == FKind::And ? b.conj(xs) : b.disj(xs);
            break;
        }
        case FKind::Ite: out = b.ite(x.atom, tr(x.kids[0]), tr(x.kids[1])); break;
        case FKind::Here: out = b.here(x.state); break;
        case FKind::UpEx: out = b.up_ex(x.state); break;
        case FKind::UpAll: out = b.disj({b.here(qr), b.up_ex(x.state)}); break;
        case FKind::DownEx: out = b.dia(x.n, x.state); break;
        case FKind::DownAll: {
            // Padding children are exempt from boxes.
            int w = b.state("k.pad_" + a.names[static_cast<size_t>(x.state)]);
            if (!b.defined(w)) b.set(w, b.ite(dbot, b.tt(), b.here(x.state)));
            out = b.box(x.n, w);
            break;
        }
        }
        memo[f] = out;
        return out;
    };
    for (int q = 0; q < n; ++q) b.set(q, b.ite(dbot, b.ff(), tr(a.delta[q])));
    b.set(q0p, b.conj({b.lit(broot), b.nlit(dbot), b.here(a.initial), b.box(0, q1)}));
    b.set(q1, b.ite(dbot, b.tt(), b.conj({b.nlit(broot), b.box(0, q1)})));
    b.set(qr, b.lit(broot));
    b.set(qbot, b.ff());
    b.set_initial(q0p);
    TwoWayAutomaton out = b.finish();
    out.k = std::max(1, n * std::max(1, a.max_count()));
    return out;
}

std::string RegularTreeRep::to_json(const Alphabet &alpha) const {
    nlohmann::ordered_json j;
    j["root"] = root;
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (size_t i = 0; i < labels.size(); ++i) {
        nlohmann::ordered_json n;
        n["id"] = i;
        for (int c = 0; c < 4; ++c) {
            nlohmann::ordered_json part = nlohmann::ordered_json::array();
            for (size_t x = 0; x < alpha.size(); ++x)
                if (alpha.atoms()[x].comp == c && labels[i][x]) {
                    const LabelAtom &at = alpha.atoms()[x];
                    part.push_back(at.role ? role_str(at.sym) : sym_name(at.sym));
                }
            n["L" + std::to_string(c)] = part;
        }
        n["children"] = kids[i];
        nodes.push_back(n);
    }
    j["nodes"] = nodes;
    return j.dump(2);
}

std::optional<RegularTreeRep> canonical_tree(const AutomataContext &c, const ABox &abox, Sym root) {
    if (!abox.tree_shaped()) return std::nullopt;
    ChaseResult ch1 = c.R1.chase(abox), ch2 = c.R2.chase(abox);
    if (!ch1.consistent || !ch2.consistent || !ch1.tp.count(root)) return std::nullopt;
    const Alphabet &al = *c.alpha;
    auto put = [&](Label &l, int atom) {
        if (atom >= 0) l.set(static_cast<size_t>(atom));
    };
    RegularTreeRep t;
    std::map<Succ, int> anon;
    std::function<int(const Succ &)> anon_node = [&](const Succ &s) -> int {
        auto it = anon.find(s);
        if (it != anon.end()) return it->second;
        Label l;
        for (Sym a : s.type) put(l, al.concept_atom(1, a));
        for (Role r : s.rho) put(l, al.role_atom(1, r));
        int v = t.add(l);
        anon[s] = v;
        for (const Succ &k : c.R1.children(s.type, s.rho)) {
            int w = anon_node(k);
            t.kids[static_cast<size_t>(v)].push_back(w);
        }
        return v;
    };
    std::function<int(Sym, Sym, Role)> ind_node = [&](Sym x, Sym parent, Role in) -> int {
        Label l;
        if (parent < 0) put(l, al.concept_atom(0, star_sym()));
        else put(l, al.role_atom(0, in));
        for (const auto &ca : abox.concepts)
            if (ca.ind == x) put(l, al.concept_atom(0, ca.cname));
        for (Sym a : ch1.tp.at(x)) put(l, al.concept_atom(1, a));
        for (Sym a : ch2.tp.at(x)) put(l, al.concept_atom(2, a));
        if (parent >= 0) {
            for (auto [p, r, y] : ch1.edges)
                if (p == parent && y == x) put(l, al.role_atom(1, r));
            for (auto [p, r, y] : ch2.edges)
                if (p == parent && y == x) put(l, al.role_atom(2, r));
        }
        int v = t.add(l);
        for (const auto &ra : abox.roles) {
            if (ra.a == x && ra.b != parent) {
                int w = ind_node(ra.b, x, mk_role(ra.role));
                t.kids[static_cast<size_t>(v)].push_back(w);
            } else if (ra.b == x && ra.a != parent) {
                int w = ind_node(ra.a, x, mk_role(ra.role, true));
                t.kids[static_cast<size_t>(v)].push_back(w);
            }
        }
        for (const Succ &s : c.R1.abox_children(ch1, x)) {
            int w = anon_node(s);
            t.kids[static_cast<size_t>(v)].push_back(w);
        }
        return v;
    };
    t.root = ind_node(root, -1, 0);
    return t;
}

}  // namespace hornce
