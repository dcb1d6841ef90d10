#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "hornce/entailment.hpp"
#include "hornce/models.hpp"
#include "hornce/mosaics.hpp"
#include "oracles.hpp"

using namespace hornce;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

int failures = 0;

void report(int n, bool ok, const std::string &what, double seconds) {
    std::printf("%s criterion %d: %s (%.2f s)\n", ok ? "PASS" : "FAIL", n, what.c_str(), seconds);
    std::fflush(stdout);
    failures += !ok;
}

NormalTBox N(const char *src) { return normalize(parse_tbox(src)); }
Signature S(const char *src) { return parse_signature(src); }

// Certificate audit shared by criteria 1 to 6.
struct Audit {
    size_t nonempty = 0, validated = 0, instances = 0, trees = 0, mismatches = 0, accepted = 0;

    void verdict(const Verdict &v) {
        if (v.entails || v.precheck_failed() || !v.automaton) return;
        ++nonempty;
        if (v.certificate && run_on_regular_tree(*v.automaton, *v.certificate)) ++validated;
    }

    // Membership of the intersection against the conjunction over its parts on 20 regular trees.
    void intersection(const AutomataContext &c, bool sim, oracle::Rng &rng) {
        std::vector<TwoWayAutomaton> parts = {build_A1(c), build_A2(c), build_A3(c),
                                              sim ? build_A4_sim(c) : build_A4(c)};
        TwoWayAutomaton all = intersect(parts);
        std::vector<RegularTreeRep> base;
        enumerate_tree_aboxes(c.sa, 2, [&](const ABox &ab, const std::vector<Sym> &inds) {
            if (auto t = canonical_tree(c, ab, inds.front())) base.push_back(*t);
            return base.size() >= 10;
        });
        int atoms = static_cast<int>(c.alpha->size()) - 2;  // without the k-ary markers
        ++instances;
        for (int i = 0; i < 20; ++i) {
            RegularTreeRep t;
            if (!base.empty() && i % 2 == 0) {
                t = base[static_cast<size_t>(rng.below(static_cast<int>(base.size())))];
                int flips = rng.below(3);
                for (int j = 0; j < flips; ++j)
                    t.labels[static_cast<size_t>(rng.below(static_cast<int>(t.labels.size())))].flip(
                        static_cast<size_t>(rng.below(atoms)));
            } else {
                int n = 1 + rng.below(4);
                for (int v = 0; v < n; ++v) {
                    Label l;
                    for (int a = 0; a < atoms; ++a)
                        if (rng.coin(20)) l.set(static_cast<size_t>(a));
                    t.add(l);
                }
                for (int v = 0; v < n; ++v)
                    for (int k = rng.below(3); k > 0; --k) t.kids[static_cast<size_t>(v)].push_back(rng.below(n));
            }
            bool conj = true;
            for (const auto &p : parts) conj = conj && run_on_regular_tree(p, t);
            mismatches += run_on_regular_tree(all, t) != conj;
            accepted += conj;
            ++trees;
        }
    }
};

Audit audit;
oracle::Rng tree_rng(7001);

const char *ADVISOR_T1 = "PhDStud sub some advBy Prof\nadv subr inv(advBy)";
const char *ADVISOR_T2 = "PhDStud sub some advBy Prof\nadv subr inv(advBy)\nfunc(advBy)";
const char *CHAIN_T1 = "A sub some s B\nB sub some inv(r) B";
const char *CHAIN_T2 = "A sub some s B\nB sub some r B";

void criterion1() {
    auto t0 = Clock::now();
    NormalTBox t1 = N(ADVISOR_T1), t2 = N(ADVISOR_T2);
    Signature sa = S("concepts: PhDStud\nroles: adv"), sq = S("concepts: Prof");
    Verdict v = decide_cq_entailment(t1, t2, sa, sq);
    audit.verdict(v);
    Reasoner r1(t1), r2(t2);
    auto w = oracle_witness_search(r1, r2, sa, sq, 2, 1, false);
    bool witness = w && print_abox(w->abox).find("PhDStud(b)") != std::string::npos &&
                   print_abox(w->abox).find("adv(a,b)") != std::string::npos &&
                   print_cq(w->query) == "q(x) <- Prof(x)" && w->answer.size() == 1 &&
                   sym_name(w->answer[0]) == "a";
    audit.intersection(make_context(r1, r2, sa, sq), false, tree_rng);
    double s = since(t0);
    report(1, !v.entails && witness && s < 10,
           "advisor cq=" + std::string(v.entails ? "true" : "false") +
               ", oracle(2,1) witness " + (w ? witness_json(*w) : std::string("none")),
           s);
}

void criterion2() {
    auto t0 = Clock::now();
    NormalTBox t1 = N(""), t2 = N("A1 and A2 sub bot");
    Signature sa = S("concepts: A1, A2"), sq = S("concepts: B");
    Verdict cq = decide_cq_entailment(t1, t2, sa, sq);
    Verdict inc = decide_cq_entailment_incons(t1, t2, sa, sq);
    audit.verdict(cq);
    audit.verdict(inc);
    Reasoner r1(t1), r2(t2);
    audit.intersection(make_context(r1, r2, sa, sq), false, tree_rng);
    double s = since(t0);
    report(2, cq.entails && !inc.entails && s < 10,
           std::string("disjointness cq=") + (cq.entails ? "true" : "false") +
               " cq-incons=" + (inc.entails ? "true" : "false"),
           s);
}

void criterion3() {
    auto t0 = Clock::now();
    NormalTBox t1 = N(CHAIN_T1), t2 = N(CHAIN_T2);
    Signature sa = S("concepts: A"), sq = S("roles: r");
    Verdict cq = decide_cq_entailment(t1, t2, sa, sq);
    Verdict tq = decide_1tcq_entailment(t1, t2, sa, sq);
    audit.verdict(cq);
    audit.verdict(tq);
    Reasoner r1(t1), r2(t2);
    audit.intersection(make_context(r1, r2, sa, sq), false, tree_rng);
    audit.intersection(make_context(r1, r2, sa, sq), true, tree_rng);
    double s = since(t0);
    report(3, cq.entails && tq.entails && s < 60,
           std::string("inverse chain cq=") + (cq.entails ? "true" : "false") + " 1tcq=" + (tq.entails ? "true" : "false"),
           s);
}

void criterion4() {
    auto t0 = Clock::now();
    Verdict a = decide_deductive(parse_tbox(""), parse_tbox("A1 and A2 sub bot"), S("concepts: A1, A2, B"));
    double sa = since(t0);
    auto t1 = Clock::now();
    Verdict b = decide_deductive(parse_tbox(""), parse_tbox("A sub some r B"), S("concepts: A, B"));
    double sb = since(t1);
    audit.verdict(a);
    audit.verdict(b);
    report(4, !a.entails && b.entails && sa < 10 && sb < 10,
           std::string("deductive: disjointness ") + (a.entails ? "true" : "false") + ", existential " +
               (b.entails ? "true" : "false"),
           sa + sb);
}

Signature random_sig(oracle::Rng &rng) {
    Signature s;
    for (Sym c : oracle::concept_pool(3))
        if (rng.coin(60)) set_insert(s.concepts, c);
    for (Sym r : oracle::role_pool(2))
        if (rng.coin(70)) set_insert(s.roles, r);
    return s;
}

void criterion5() {
    auto t0 = Clock::now();
    oracle::Rng rng(5005);
    int runs = 0, contradictions = 0, negatives = 0;
    while (runs < 120) {
        Reasoner r1(normalize(oracle::random_tbox(rng, 3, 3, 2, true)));
        Reasoner r2(normalize(oracle::random_tbox(rng, 3, 3, 2, true)));
        SymSet t1 = r1.type_of({intern("A")}), t2 = r2.type_of({intern(rng.coin(50) ? "A" : "B")});
        if (!r1.consistent(t1) || !r2.consistent(t2)) continue;
        Signature sig = random_sig(rng);
        TypeGraph g1 = type_graph(r1, t1), g2 = type_graph(r2, t2);
        bool holds = decide_fin_hom(g1, g2, sig).holds;
        TypeGraph src = con_part(g2, sig);
        bool oracle_all = true;
        for (size_t n = 1; n <= 4 && oracle_all; ++n) oracle_all = n_bounded_hom_oracle(src, g1, sig, n);
        contradictions += holds && !oracle_all;
        negatives += !holds;
        ++runs;
    }
    double s = since(t0);
    report(5, contradictions == 0 && s < 600,
           std::to_string(runs) + " mosaic instances, " + std::to_string(contradictions) + " contradictions, " +
               std::to_string(negatives) + " negative",
           s);
}

void criterion6() {
    auto t0 = Clock::now();
    oracle::Rng rng(6006);
    Signature sig;
    for (Sym a : oracle::concept_pool(2)) set_insert(sig.concepts, a);
    for (Sym r : oracle::role_pool(2)) set_insert(sig.roles, r);
    int runs = 0, bad = 0, refuted = 0, errors = 0, probed = 0, fixpoint = 0;
    int plain_done = 0, plain_bad = 0, plain_over = 0;
    Options o;
    o.limits.seconds = 120;
    // The same pipeline with no probe trees, so that refutations also come from the fixpoint.
    Options plain = o;
    plain.probe_individuals = 0;
    plain.limits.seconds = 30;
    for (; runs < 200; ++runs) {
        NormalTBox t1 = normalize(oracle::random_eli_tbox(rng, 3, 2, 2));
        NormalTBox t2 = normalize(oracle::random_eli_tbox(rng, 3, 2, 2));
        Reasoner r1(t1), r2(t2);
        auto w = oracle_witness_search(r1, r2, sig, sig, 3, 3, false);
        refuted += w.has_value();
        try {
            Verdict v = decide_cq_entailment(t1, t2, sig, sig, o);
            audit.verdict(v);
            if (w && v.entails) ++bad;
            if (!v.entails && v.certificate) ++(v.stats.keys == 0 ? probed : fixpoint);
            try {
                Verdict p = decide_cq_entailment(t1, t2, sig, sig, plain);
                audit.verdict(p);
                plain_bad += p.entails != v.entails || (w && p.entails);
                ++plain_done;
            } catch (const ResourceLimit &) {
                ++plain_over;
            }
        } catch (const ResourceLimit &) {
            ++errors;
        }
        audit.intersection(make_context(r1, r2, sig, sig), false, tree_rng);
    }
    double s = since(t0);
    report(6, bad == 0 && errors == 0 && plain_bad == 0 && s < 1800,
           std::to_string(runs) + " random ELI problems, " + std::to_string(refuted) + " oracle witnesses, " +
               std::to_string(bad) + " disagreements, " + std::to_string(errors) + " budget overruns, refutations by " +
               std::to_string(probed) + " probe trees and " + std::to_string(fixpoint) + " fixpoint runs; without probe " +
               std::to_string(plain_done) + " decided, " + std::to_string(plain_bad) + " disagreements, " +
               std::to_string(plain_over) + " over 30 s",
           s);
}

void criterion7() {
    report(7,
           audit.nonempty > 0 && audit.validated == audit.nonempty && audit.mismatches == 0 &&
               audit.trees == 20 * audit.instances,
           std::to_string(audit.validated) + "/" + std::to_string(audit.nonempty) +
               " certificates re-validated, " + std::to_string(audit.trees) + " trees over " +
               std::to_string(audit.instances) + " instances, " + std::to_string(audit.accepted) +
               " accepted, " + std::to_string(audit.mismatches) + " intersection mismatches",
           0);
}

void criterion8() {
    auto t0 = Clock::now();
    oracle::Rng rng(8008);
    auto cs = oracle::concept_pool(2);
    auto rs = oracle::role_pool(1);
    int queries = 0, mismatches = 0;
    while (queries < 500) {
        TBox src = oracle::random_tbox(rng, 3, 2, 1, true);
        Reasoner r(normalize(src));
        auto models = oracle::small_models(src, cs, rs, 3);
        for (int k = 0; k < 5; ++k, ++queries) {
            std::vector<Sym> lhs = {cs[static_cast<size_t>(rng.below(2))]};
            if (rng.coin(30)) lhs.push_back(cs[static_cast<size_t>(rng.below(2))]);
            Sym rhs = rng.coin(15) ? -1 : cs[static_cast<size_t>(rng.below(2))];
            SymSet seed(lhs.begin(), lhs.end());
            set_normalize(seed);
            bool ours = r.subsumes(seed, rhs < 0 ? bot_sym() : rhs);
            mismatches += ours != oracle::no_countermodel(models, lhs, rhs);
        }
    }
    double s = since(t0);
    report(8, mismatches == 0 && s < 300,
           std::to_string(queries) + " subsumption queries, " + std::to_string(mismatches) + " mismatches", s);
}

}  // namespace

int main() {
    std::vector<std::function<void()>> all = {criterion1, criterion2, criterion3, criterion4,
                                              criterion5, criterion6, criterion7, criterion8};
    for (size_t i = 0; i < all.size(); ++i) {
        try {
            all[i]();
        } catch (const std::exception &e) {
            report(static_cast<int>(i + 1), false, std::string("error: ") + e.what(), 0);
        }
    }
    return failures == 0 ? 0 : 1;
}
