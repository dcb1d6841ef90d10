#include "doctest.h"

#include "game_oracle.hpp"
#include "hornce/automata.hpp"
#include "oracles.hpp"

using namespace hornce;

namespace {

Reasoner R(const char *src) { return Reasoner(normalize(parse_tbox(src))); }

std::shared_ptr<const Alphabet> toy_alphabet(int atoms) {
    auto al = std::make_shared<Alphabet>();
    for (int i = 0; i < atoms; ++i) al->add(1, false, intern("p" + std::to_string(i)));
    al->add(3, false, dbot_sym());
    al->add(3, false, broot_sym());
    return al;
}

// Random automaton over the first 'atoms' label atoms; weakness is not guaranteed.
TwoWayAutomaton random_automaton(oracle::Rng &rng, const std::shared_ptr<const Alphabet> &al, int states, int atoms) {
    AutomatonBuilder b(al);
    for (int q = 0; q < states; ++q) b.state("q" + std::to_string(q), rng.coin(40) ? 1 : 0);
    std::function<int(int)> gen = [&](int depth) -> int {
        int k = rng.below(depth <= 0 ? 7 : 10);
        int q = rng.below(states);
        switch (k) {
        case 0: return rng.coin(70) ? b.tt() : b.ff();
        case 1: return b.lit(rng.below(atoms));
        case 2: return b.here(q);
        case 3: return b.up_ex(q);
        case 4: return b.up_all(q);
        case 5: return b.dia(1 + rng.below(2), q);
        case 6: return b.box(rng.below(2), q);
        case 7: return b.conj({gen(depth - 1), gen(depth - 1)});
        case 8: return b.disj({gen(depth - 1), gen(depth - 1)});
        default: return b.ite(rng.below(atoms), gen(depth - 1), gen(depth - 1));
        }
    };
    for (int q = 0; q < states; ++q) b.set(q, gen(2));
    b.set_initial(0);
    return b.finish();
}

Label random_label(oracle::Rng &rng, int atoms) {
    Label l;
    for (int i = 0; i < atoms; ++i)
        if (rng.coin(50)) l.set(static_cast<size_t>(i));
    return l;
}

oracle::FiniteTree random_finite_tree(oracle::Rng &rng, int atoms) {
    oracle::FiniteTree t;
    std::function<void(int, int)> grow = [&](int p, int depth) {
        int v = t.add(random_label(rng, atoms), p);
        if (depth >= 3) return;
        int n = rng.below(3);
        for (int i = 0; i < n; ++i) grow(v, depth + 1);
    };
    grow(-1, 0);
    return t;
}

RegularTreeRep as_rep(const oracle::FiniteTree &t) {
    RegularTreeRep r;
    for (const Label &l : t.labels) r.add(l);
    r.kids = t.kids;
    return r;
}

RegularTreeRep random_regular_tree(oracle::Rng &rng, int atoms) {
    RegularTreeRep r;
    int n = 1 + rng.below(4);
    for (int i = 0; i < n; ++i) r.add(random_label(rng, atoms));
    for (int i = 0; i < n; ++i) {
        int k = rng.below(3);
        for (int j = 0; j < k; ++j) r.kids[static_cast<size_t>(i)].push_back(rng.below(n));
    }
    return r;
}

bool is_weak(const TwoWayAutomaton &a) {
    try {
        RegularTreeRep t;
        t.add(Label{});
        run_on_regular_tree(a, t);
        return true;
    } catch (const std::invalid_argument &) {
        return false;
    }
}

Label label_of(const Alphabet &al, std::initializer_list<std::tuple<int, const char *, bool>> atoms) {
    Label l;
    for (auto [comp, name, role] : atoms) {
        int i = -1;
        if (!role) {
            i = al.concept_atom(comp, name[0] == '*' ? star_sym() : intern(name));
        } else {
            std::string s = name;
            bool inverse = s.rfind("inv(", 0) == 0;
            if (inverse) s = s.substr(4, s.size() - 5);
            i = al.role_atom(comp, mk_role(intern(s), inverse));
        }
        REQUIRE_MESSAGE(i >= 0, name);
        l.set(static_cast<size_t>(i));
    }
    return l;
}

TwoWayAutomaton one_state(const std::shared_ptr<const Alphabet> &al, int prio, const std::function<int(AutomatonBuilder &, int)> &f) {
    AutomatonBuilder b(al);
    int q = b.state("q0", prio);
    b.set(q, f(b, q));
    return b.finish();
}

RegularTreeRep chain(int n, bool loop) {
    RegularTreeRep t;
    for (int i = 0; i < n; ++i) t.add(Label{});
    for (int i = 0; i + 1 < n; ++i) t.kids[static_cast<size_t>(i)].push_back(i + 1);
    if (loop) t.kids[static_cast<size_t>(n - 1)].push_back(n - 1);
    return t;
}

const char *ADVISOR_T1 = "PhDStud sub some advBy Prof\nadv subr inv(advBy)";
const char *ADVISOR_T2 = "PhDStud sub some advBy Prof\nadv subr inv(advBy)\nfunc(advBy)";
const char *CHAIN_T1 = "A sub some s B\nB sub some inv(r) B";
const char *CHAIN_T2 = "A sub some s B\nB sub some r B";

TwoWayAutomaton pipeline(const AutomataContext &c, bool sim) {
    return intersect({build_A1(c), build_A2(c), build_A3(c), sim ? build_A4_sim(c) : build_A4(c)});
}

}  // namespace

TEST_CASE("formula evaluation agrees with truth tables") {
    oracle::Rng rng(31);
    auto al = toy_alphabet(10);
    for (int i = 0; i < 200; ++i) {
        AutomatonBuilder b(al);
        int q0 = b.state("q0"), yes = b.state("yes"), no = b.state("no");
        b.set(yes, b.tt());
        b.set(no, b.ff());
        std::function<int(int)> gen = [&](int depth) -> int {
            int k = rng.below(depth <= 0 ? 3 : 6);
            if (k == 0) return b.lit(rng.below(10));
            if (k == 1) return b.nlit(rng.below(10));
            if (k == 2) return b.here(rng.coin(50) ? yes : no);
            if (k == 3) return b.conj({gen(depth - 1), gen(depth - 1)});
            if (k == 4) return b.disj({gen(depth - 1), gen(depth - 1), gen(depth - 1)});
            return b.ite(rng.below(10), gen(depth - 1), gen(depth - 1));
        };
        int f = gen(4);
        b.set(q0, f);
        b.set_initial(q0);
        TwoWayAutomaton a = b.finish();
        std::function<bool(int, const Label &)> eval = [&](int x, const Label &l) -> bool {
            const FNode &n = a.f[static_cast<size_t>(x)];
            switch (n.kind) {
            case FKind::True: return true;
            case FKind::False: return false;
            case FKind::And:
                for (int k : n.kids)
                    if (!eval(k, l)) return false;
                return true;
            case FKind::Or:
                for (int k : n.kids)
                    if (eval(k, l)) return true;
                return false;
            case FKind::Ite: return eval(n.kids[l[static_cast<size_t>(n.atom)] ? 0 : 1], l);
            case FKind::Here: return n.state == yes;
            default: return false;
            }
        };
        for (int j = 0; j < 8; ++j) {
            RegularTreeRep t;
            t.add(random_label(rng, 10));
            CHECK(run_on_regular_tree(a, t) == eval(f, t.labels[0]));
        }
    }
}

TEST_CASE("guards resolve completely on every label") {
    Reasoner r1 = R(ADVISOR_T1), r2 = R(ADVISOR_T2);
    AutomataContext c = make_context(r1, r2, parse_signature("concepts: PhDStud\nroles: adv"),
                                     parse_signature("concepts: Prof"));
    TwoWayAutomaton a = pipeline(c, false);
    oracle::Rng rng(32);
    for (int i = 0; i < 300; ++i) {
        Label l = random_label(rng, static_cast<int>(a.alpha->size()));
        for (size_t q = 0; q < a.num_states(); ++q)
            CHECK(residual_str(a, a.delta[q], l).find("(if ") == std::string::npos);
    }
    CHECK(dump(a).find("state init priority 0") != std::string::npos);
}

TEST_CASE("diamond loop automata") {
    auto al = toy_alphabet(1);
    TwoWayAutomaton odd = one_state(al, 1, [](AutomatonBuilder &b, int q) { return b.dia(1, q); });
    TwoWayAutomaton even = one_state(al, 0, [](AutomatonBuilder &b, int q) { return b.dia(1, q); });
    CHECK_FALSE(run_on_regular_tree(odd, chain(1, true)));
    CHECK_FALSE(run_on_regular_tree(odd, chain(3, false)));
    CHECK(run_on_regular_tree(even, chain(1, true)));
    CHECK(run_on_regular_tree(even, chain(3, true)));
    CHECK_FALSE(run_on_regular_tree(even, chain(3, false)));
    CHECK(is_empty(odd).empty);
    EmptinessResult r = is_empty(even);
    REQUIRE_FALSE(r.empty);
    REQUIRE(r.certificate);
    CHECK_FALSE(oracle::unfold(*r.certificate).has_value());
    TwoWayAutomaton yes = one_state(al, 0, [](AutomatonBuilder &b, int) { return b.tt(); });
    CHECK(run_on_regular_tree(yes, chain(2, false)));
    CHECK_FALSE(is_empty(yes).empty);
    TwoWayAutomaton no = one_state(al, 0, [](AutomatonBuilder &b, int) { return b.ff(); });
    CHECK(is_empty(no).empty);
}

TEST_CASE("non-weak automata are refused") {
    auto al = toy_alphabet(1);
    AutomatonBuilder b(al);
    int p = b.state("p", 1), q = b.state("q", 0);
    b.set(p, b.dia(1, q));
    b.set(q, b.disj({b.dia(1, p), b.dia(1, q)}));
    TwoWayAutomaton a = b.finish();
    CHECK_THROWS_AS(is_empty(a), std::invalid_argument);
}

TEST_CASE("membership agrees with the explicit acceptance game") {
    oracle::Rng rng(33);
    auto al = toy_alphabet(3);
    int compared = 0, accepted = 0;
    for (int i = 0; i < 400 && compared < 1500; ++i) {
        TwoWayAutomaton a = random_automaton(rng, al, 2 + rng.below(3), 3);
        if (!is_weak(a)) continue;
        for (int j = 0; j < 6; ++j) {
            oracle::FiniteTree t = random_finite_tree(rng, 3);
            bool g = oracle::game_accepts(a, t);
            CHECK(run_on_regular_tree(a, as_rep(t)) == g);
            accepted += g;
            ++compared;
        }
    }
    CHECK(compared > 500);
    CHECK(accepted > 50);
}

TEST_CASE("emptiness agrees with bounded search on toy automata") {
    oracle::Rng rng(34);
    auto al = toy_alphabet(2);
    int runs = 0, empties = 0;
    for (int i = 0; i < 300 && runs < 150; ++i) {
        TwoWayAutomaton a = random_automaton(rng, al, 2 + rng.below(2), 2);
        if (!is_weak(a)) continue;
        ++runs;
        EmptinessResult r = is_empty(a);
        if (r.empty) {
            ++empties;
            for (int j = 0; j < 60; ++j) CHECK_FALSE(oracle::game_accepts(a, random_finite_tree(rng, 2)));
        } else {
            REQUIRE(r.certificate);
            CHECK(run_on_regular_tree(a, *r.certificate));
            if (auto t = oracle::unfold(*r.certificate)) CHECK(oracle::game_accepts(a, *t));
        }
        TwoWayAutomaton k = to_2ata_k(a);
        CHECK(is_empty(k).empty == r.empty);
    }
    CHECK(runs >= 100);
    CHECK(empties > 10);
    CHECK(runs - empties > 10);
}

TEST_CASE("intersection examples") {
    oracle::Rng rng(35);
    auto al = toy_alphabet(3);
    TwoWayAutomaton yes = one_state(al, 0, [](AutomatonBuilder &b, int) { return b.tt(); });
    TwoWayAutomaton no = one_state(al, 0, [](AutomatonBuilder &b, int) { return b.ff(); });
    int n = 0;
    for (int i = 0; i < 200 && n < 30; ++i) {
        TwoWayAutomaton a = random_automaton(rng, al, 3, 3);
        if (!is_weak(a)) continue;
        ++n;
        TwoWayAutomaton both = intersect({yes, a});
        CHECK(intersect({a, no}).num_states() == a.num_states() + 2);
        CHECK(is_empty(intersect({a, no})).empty);
        for (int j = 0; j < 5; ++j) {
            RegularTreeRep t = random_regular_tree(rng, 3);
            CHECK(run_on_regular_tree(both, t) == run_on_regular_tree(a, t));
        }
    }
}

TEST_CASE("k-ary translation shape") {
    auto al = toy_alphabet(1);
    AutomatonBuilder b(al);
    int q0 = b.state("q0"), q1 = b.state("q1"), q2 = b.state("q2");
    b.set(q0, b.conj({b.dia(1, q1), b.box(0, q2)}));
    b.set(q1, b.tt());
    b.set(q2, b.lit(0));
    TwoWayAutomaton a = b.finish();
    CHECK(a.max_count() == 1);
    TwoWayAutomaton k = to_2ata_k(a);
    CHECK(k.k == 3);
    CHECK(k.names[static_cast<size_t>(k.initial)] == "k.q0'");
    CHECK_FALSE(is_empty(k).empty);
    TwoWayAutomaton yes = one_state(al, 0, [](AutomatonBuilder &bb, int) { return bb.tt(); });
    CHECK_FALSE(is_empty(to_2ata_k(yes)).empty);
    TwoWayAutomaton no = one_state(al, 0, [](AutomatonBuilder &bb, int) { return bb.ff(); });
    CHECK(is_empty(to_2ata_k(no)).empty);
}

TEST_CASE("A1 examples") {
    Reasoner e = R("");
    AutomataContext c = make_context(e, e, parse_signature("concepts: A\nroles: r"), parse_signature(""));
    TwoWayAutomaton a1 = build_A1(c);
    const Alphabet &al = *c.alpha;
    RegularTreeRep one;
    one.add(label_of(al, {{0, "A", false}}));
    CHECK(run_on_regular_tree(a1, one));
    RegularTreeRep late;
    late.add(Label{});
    {
        int added = late.add(label_of(al, {{0, "A", false}}));
        late.kids[0].push_back(added);
    }
    CHECK_FALSE(run_on_regular_tree(a1, late));
    RegularTreeRep two;
    two.add(label_of(al, {{0, "A", false}}));
    {
        int added = two.add(label_of(al, {{0, "A", false}, {0, "r", true}}));
        two.kids[0].push_back(added);
    }
    CHECK(run_on_regular_tree(a1, two));
    RegularTreeRep noedge = two;
    noedge.labels[1] = label_of(al, {{0, "A", false}});
    CHECK_FALSE(run_on_regular_tree(a1, noedge));
    RegularTreeRep multi = two;
    multi.labels[1] = label_of(al, {{0, "A", false}, {0, "r", true}, {0, "inv(r)", true}});
    CHECK_FALSE(run_on_regular_tree(a1, multi));
    RegularTreeRep infinite = two;
    infinite.kids[1].push_back(1);
    CHECK_FALSE(run_on_regular_tree(a1, infinite));
    RegularTreeRep padded = two;
    {
        int added = padded.add(Label{});
        padded.kids[1].push_back(added);
    }
    padded.kids[2].push_back(2);
    CHECK(run_on_regular_tree(a1, padded));
}

TEST_CASE("A2 examples") {
    Reasoner e = R(""), f = R("func(r)");
    AutomataContext c = make_context(f, e, parse_signature(""), parse_signature("roles: r"));
    const Alphabet &al = *c.alpha;
    TwoWayAutomaton a2 = build_A2(c);
    RegularTreeRep t;
    t.add(label_of(al, {{0, "*", false}}));
    {
        int added = t.add(label_of(al, {{1, "r", true}}));
        t.kids[0].push_back(added);
    }
    CHECK(run_on_regular_tree(a2, t));
    {
        int added = t.add(label_of(al, {{1, "r", true}}));
        t.kids[0].push_back(added);
    }
    CHECK_FALSE(run_on_regular_tree(a2, t));

    AutomataContext c0 = make_context(e, e, parse_signature("concepts: A"), parse_signature(""));
    TwoWayAutomaton a20 = build_A2(c0);
    RegularTreeRep u;
    u.add(label_of(*c0.alpha, {{0, "A", false}, {1, "A", false}}));
    CHECK(run_on_regular_tree(a20, u));
    u.labels[0] = label_of(*c0.alpha, {{0, "A", false}});
    CHECK_FALSE(run_on_regular_tree(a20, u));
}

TEST_CASE("A3 examples") {
    Reasoner e = R(""), bot = R("A1 and A2 sub bot");
    AutomataContext c = make_context(e, bot, parse_signature("concepts: A1, A2"), parse_signature(""));
    const Alphabet &al = *c.alpha;
    TwoWayAutomaton a3 = build_A3(c);
    for (int mask = 0; mask < 4; ++mask) {
        RegularTreeRep t;
        Label l = label_of(al, {{0, "A1", false}, {0, "A2", false}});
        if (mask & 1) l |= label_of(al, {{2, "A1", false}});
        if (mask & 2) l |= label_of(al, {{2, "A2", false}});
        t.add(l);
        CHECK_FALSE(run_on_regular_tree(a3, t));
    }
    AutomataContext c0 = make_context(e, e, parse_signature("concepts: A1"), parse_signature(""));
    RegularTreeRep ok;
    ok.add(label_of(*c0.alpha, {{0, "A1", false}, {2, "A1", false}}));
    CHECK(run_on_regular_tree(build_A3(c0), ok));

    Reasoner r1 = R(ADVISOR_T1), r2 = R(ADVISOR_T2);
    AutomataContext x = make_context(r1, r2, parse_signature("concepts: PhDStud\nroles: adv"),
                                     parse_signature("concepts: Prof"));
    TwoWayAutomaton a3x = build_A3(x);
    RegularTreeRep w;
    w.add(label_of(*x.alpha, {{0, "*", false}, {2, "Prof", false}}));
    {
        int added = w.add(label_of(*x.alpha, {{0, "PhDStud", false},
                                                  {0, "adv", true},
                                                  {2, "PhDStud", false},
                                                  {2, "adv", true},
                                                  {2, "inv(advBy)", true}}));
        w.kids[0].push_back(added);
    }
    CHECK(run_on_regular_tree(a3x, w));
    RegularTreeRep w2 = w;
    w2.labels[0] = label_of(*x.alpha, {{0, "*", false}});
    CHECK_FALSE(run_on_regular_tree(a3x, w2));
}

TEST_CASE("A4 accepts the advisor witness") {
    Reasoner r1 = R(ADVISOR_T1), r2 = R(ADVISOR_T2);
    AutomataContext x = make_context(r1, r2, parse_signature("concepts: PhDStud\nroles: adv"),
                                     parse_signature("concepts: Prof"));
    TwoWayAutomaton a4 = build_A4(x);
    RegularTreeRep w;
    w.add(label_of(*x.alpha, {{0, "*", false}, {2, "Prof", false}}));
    int john = w.add(label_of(*x.alpha, {{0, "PhDStud", false},
                                        {0, "adv", true},
                                        {1, "PhDStud", false},
                                        {1, "adv", true},
                                        {1, "inv(advBy)", true},
                                        {2, "PhDStud", false},
                                        {2, "adv", true},
                                        {2, "inv(advBy)", true}}));
    w.kids[0].push_back(john);
    {
        int added = w.add(label_of(*x.alpha, {{1, "Prof", false}, {1, "advBy", true}}));
        w.kids[static_cast<size_t>(john)].push_back(added);
    }
    CHECK(run_on_regular_tree(a4, w));
    RegularTreeRep v = w;
    v.labels[0] |= label_of(*x.alpha, {{1, "Prof", false}});
    CHECK_FALSE(run_on_regular_tree(a4, v));
}

TEST_CASE("pipeline on the advisor problem yields a validated certificate") {
    Reasoner r1 = R(ADVISOR_T1), r2 = R(ADVISOR_T2);
    AutomataContext x = make_context(r1, r2, parse_signature("concepts: PhDStud\nroles: adv"),
                                     parse_signature("concepts: Prof"));
    TwoWayAutomaton a = pipeline(x, false);
    EmptinessResult r = is_empty(a);
    REQUIRE_FALSE(r.empty);
    REQUIRE(r.certificate);
    CHECK(run_on_regular_tree(a, *r.certificate));
    std::string js = r.certificate->to_json(*a.alpha);
    CHECK(js.find("\"PhDStud\"") != std::string::npos);
    CHECK(js.find("\"Prof\"") != std::string::npos);

    // Membership of the intersection equals the conjunction on perturbed certificates.
    std::vector<TwoWayAutomaton> parts = {build_A1(x), build_A2(x), build_A3(x), build_A4(x)};
    oracle::Rng rng(36);
    int members = 0;
    for (int i = 0; i < 20; ++i) {
        RegularTreeRep t = *r.certificate;
        int flips = rng.below(3);
        for (int j = 0; j < flips; ++j) {
            size_t v = static_cast<size_t>(rng.below(static_cast<int>(t.labels.size())));
            t.labels[v].flip(static_cast<size_t>(rng.below(static_cast<int>(a.alpha->size()) - 2)));
        }
        bool all = true;
        for (const auto &p : parts) all = all && run_on_regular_tree(p, t);
        CHECK(run_on_regular_tree(a, t) == all);
        members += all;
    }
    CHECK(members > 0);
}

TEST_CASE("pipeline on the inverse chain problem is empty") {
    Reasoner r1 = R(CHAIN_T1), r2 = R(CHAIN_T2);
    AutomataContext x = make_context(r1, r2, parse_signature("concepts: A"), parse_signature("roles: r"));
    CHECK(is_empty(pipeline(x, false)).empty);
    CHECK(is_empty(pipeline(x, true)).empty);
}

TEST_CASE("simulation variant examples") {
    Reasoner e = R(""), t2 = R("A sub some r B");
    Signature s = parse_signature("concepts: A, B\nroles: r");
    AutomataContext x = make_context(e, t2, s, s);
    EmptinessResult r = is_empty(pipeline(x, true));
    CHECK_FALSE(r.empty);
    AutomataContext same = make_context(t2, t2, s, s);
    CHECK(is_empty(pipeline(same, true)).empty);
    CHECK(is_empty(pipeline(same, false)).empty);
}

TEST_CASE("self entailment on random TBoxes gives empty languages") {
    oracle::Rng rng(37);
    for (int i = 0; i < 15; ++i) {
        Reasoner r(normalize(oracle::random_eli_tbox(rng, 3, 2, 2)));
        Signature s;
        for (Sym a : oracle::concept_pool(2)) set_insert(s.concepts, a);
        for (Sym a : oracle::role_pool(2)) set_insert(s.roles, a);
        AutomataContext x = make_context(r, r, s, s);
        CHECK(is_empty(pipeline(x, false)).empty);
        CHECK(is_empty(pipeline(x, true)).empty);
    }
}
