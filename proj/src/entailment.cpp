#include "hornce/entailment.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace hornce {

namespace {

const std::vector<std::pair<Mode, std::string>> &mode_names() {
    static const std::vector<std::pair<Mode, std::string>> v = {
        {Mode::CQ, "cq"},           {Mode::OneTCQ, "1tcq"},         {Mode::Deductive, "deductive"},
        {Mode::CQIncons, "cq-incons"}, {Mode::Conservative, "conservative"}, {Mode::Inseparable, "inseparable"}};
    return v;
}

RoleSet both_dirs(const SymSet &names) {
    RoleSet out;
    for (Sym r : names) {
        out.push_back(mk_role(r));
        out.push_back(mk_role(r, true));
    }
    set_normalize(out);
    return out;
}

void add_stats(Verdict &into, const Verdict &v) {
    into.stats.keys += v.stats.keys;
    into.stats.evaluations += v.stats.evaluations;
    into.stats.local_solutions += v.stats.local_solutions;
    into.stats.outer_rounds += v.stats.outer_rounds;
    into.stats.seconds += v.stats.seconds;
    into.pipeline_runs += v.pipeline_runs;
    into.automaton_states = std::max(into.automaton_states, v.automaton_states);
}

// Takes over a failing sub-verdict, keeping the accumulated statistics.
void fail_with(Verdict &into, const Verdict &v, const std::string &reason) {
    add_stats(into, v);
    into.entails = false;
    into.ri = v.ri;
    into.profile = v.profile;
    into.profile_msg = v.profile_msg;
    into.reason = reason;
    into.witness = v.witness;
    into.certificate = v.certificate;
    into.automaton = v.automaton;
}

Verdict pipeline(const NormalTBox &t1, const NormalTBox &t2, const Signature &sa, const Signature &sq, bool sim,
                 const Options &o) {
    Reasoner R1(t1), R2(t2);
    Verdict v;
    if (!check_ri(R1, R2, sa, sq)) {
        v.entails = false;
        v.ri = false;
        v.reason = "ri";
        return v;
    }
    AutomataContext c = make_context(R1, R2, sa, sq);
    auto shared = std::make_shared<const TwoWayAutomaton>(
        intersect({build_A1(c), build_A2(c), build_A3(c), sim ? build_A4_sim(c) : build_A4(c)}));
    const TwoWayAutomaton &a = *shared;
    v.automaton_states = a.num_states();
    v.pipeline_runs = 1;
    std::optional<RegularTreeRep> hit;
    enumerate_tree_aboxes(sa, o.probe_individuals, [&](const ABox &ab, const std::vector<Sym> &inds) {
        std::optional<RegularTreeRep> t = canonical_tree(c, ab, inds.front());
        if (t && run_on_regular_tree(a, *t)) hit = std::move(t);
        return hit.has_value();
    });
    if (hit) {
        v.entails = false;
        v.reason = "pipeline";
        v.certificate = std::move(hit);
        v.automaton = shared;
        return v;
    }
    EmptinessResult r = is_empty(a, o.limits);
    v.stats = r.stats;
    if (!r.empty) {
        v.entails = false;
        v.reason = "pipeline";
        v.certificate = r.certificate;
        v.automaton = shared;
    }
    return v;
}

Sym incons_sym() {
    static const Sym s = intern("_Incons");
    return s;
}

}  // namespace

std::string mode_name(Mode m) {
    for (auto &[k, n] : mode_names())
        if (k == m) return n;
    return "?";
}

std::optional<Mode> parse_mode(std::string_view s) {
    for (auto &[k, n] : mode_names())
        if (n == s) return k;
    return std::nullopt;
}

bool check_ri(const Reasoner &R1, const Reasoner &R2, const Signature &sa, const Signature &sq) {
    for (Role r : both_dirs(sa.roles))
        for (Role s : both_dirs(sq.roles))
            if (R2.role_sub(r, s) && !R1.role_sub(r, s)) return false;
    return true;
}

bool check_fa(const Reasoner &R1, const Reasoner &R2, const Signature &sig) {
    for (Role r : both_dirs(sig.roles))
        if (R2.below_func(r) && !R1.below_func(r)) return false;
    return true;
}

bool decide_universal(const Reasoner &R1, const Signature &sa, const Signature &sq) {
    if (!sq.roles.empty()) return false;
    Sym a = intern("a"), b = intern("b");
    std::vector<ABox> singles;
    for (Sym c : sa.concepts) singles.push_back(ABox{{{c, a}}, {}});
    for (Sym r : sa.roles) singles.push_back(ABox{{}, {{r, a, b}}});
    for (const ABox &ab : singles) {
        ChaseResult ch = R1.chase(ab);
        if (!ch.consistent) continue;
        for (auto &[ind, ty] : ch.tp)
            for (Sym c : sq.concepts)
                if (!set_has(ty, c)) return false;
    }
    return true;
}

Verdict decide_cq_entailment(const NormalTBox &t1, const NormalTBox &t2, const Signature &sa, const Signature &sq,
                             const Options &o) {
    return pipeline(t1, t2, sa, sq, false, o);
}

Verdict decide_1tcq_entailment(const NormalTBox &t1, const NormalTBox &t2, const Signature &sa,
                               const Signature &sq, const Options &o) {
    return pipeline(t1, t2, sa, sq, true, o);
}

NormalTBox bot_replaced(const NormalTBox &t, Sym a, const SymSet &roles) {
    NormalTBox out = t;
    for (NCI &ci : out.cis)
        if (ci.kind == NKind::SubBot) ci = NCI{NKind::AndSub, ci.a, ci.a, a};
    for (Sym s : roles) {
        out.cis.push_back(NCI{NKind::SubForall, a, -1, a, mk_role(s)});
        out.cis.push_back(NCI{NKind::SubForall, a, -1, a, mk_role(s, true)});
    }
    std::sort(out.cis.begin(), out.cis.end());
    out.cis.erase(std::unique(out.cis.begin(), out.cis.end()), out.cis.end());
    return out;
}

Verdict decide_incons_entailment(const NormalTBox &t1, const NormalTBox &t2, const Signature &sa,
                                 const Options &o) {
    Verdict v;
    bool has_bot = std::any_of(t2.cis.begin(), t2.cis.end(), [](const NCI &c) { return c.kind == NKind::SubBot; });
    if (!has_bot && t2.funcs.empty()) return v;

    Reasoner R1(t1), R2(t2);
    Sym a = intern("a"), b = intern("b"), c = intern("c");
    RoleSet dirs = both_dirs(sa.roles);
    auto edge = [](Role r, Sym x, Sym y) {
        return is_inv(r) ? RoleAssertion{role_name(r), y, x} : RoleAssertion{role_name(r), x, y};
    };
    for (size_t i = 0; i < dirs.size(); ++i) {
        for (size_t j = i; j < dirs.size(); ++j) {
            ABox fork{{}, {edge(dirs[i], a, b), edge(dirs[j], a, c)}};
            if (!R2.abox_consistent(fork) && R1.abox_consistent(fork)) {
                v.entails = false;
                v.reason = "fork";
                v.witness = Witness{fork, CQ{}, {}};
                return v;
            }
        }
    }

    Sym fresh = incons_sym();
    SymSet roles = set_union(t1.role_names(), t2.role_names());
    roles = set_union(roles, sa.roles);
    Signature sq;
    sq.concepts = {fresh};
    Verdict p = pipeline(bot_replaced(t1, fresh, roles), bot_replaced(t2, fresh, roles), sa, sq, false, o);
    if (!p.entails) {
        fail_with(v, p, "incons");
        v.ri = true;
        return v;
    }
    add_stats(v, p);
    return v;
}

Verdict decide_cq_entailment_incons(const NormalTBox &t1, const NormalTBox &t2, const Signature &sa,
                                    const Signature &sq, const Options &o) {
    Verdict v;
    if (decide_universal(Reasoner(t1), sa, sq)) return v;
    Verdict cq = decide_cq_entailment(t1, t2, sa, sq, o);
    if (!cq.entails) {
        fail_with(v, cq, cq.reason);
        return v;
    }
    add_stats(v, cq);
    Verdict inc = decide_incons_entailment(t1, t2, sa, o);
    if (!inc.entails) {
        fail_with(v, inc, inc.reason);
        return v;
    }
    add_stats(v, inc);
    return v;
}

Verdict decide_deductive(const TBox &t1, const TBox &t2, const Signature &sig, const Options &o) {
    Verdict v;
    for (const TBox *t : {&t1, &t2}) {
        try {
            check_profile(*t, Profile::ELHIFbot);
        } catch (const ProfileError &e) {
            v.entails = false;
            v.profile = false;
            v.profile_msg = std::string(t == &t1 ? "T1: " : "T2: ") + e.what();
            v.reason = "profile";
            return v;
        }
    }
    NormalTBox n1 = normalize(t1), n2 = normalize(t2);
    Reasoner R1(n1), R2(n2);
    if (!check_ri(R1, R2, sig, sig)) {
        v.entails = false;
        v.ri = false;
        v.reason = "ri";
        return v;
    }
    if (!check_fa(R1, R2, sig)) {
        v.entails = false;
        v.reason = "fa";
        return v;
    }
    Verdict tq = decide_1tcq_entailment(n1, n2, sig, sig, o);
    if (!tq.entails) {
        fail_with(v, tq, "1tcq");
        return v;
    }
    add_stats(v, tq);
    Verdict inc = decide_incons_entailment(n1, n2, sig, o);
    if (!inc.entails) {
        fail_with(v, inc, inc.reason);
        return v;
    }
    add_stats(v, inc);
    return v;
}

namespace {

Verdict decide_base(const TBox &t1, const TBox &t2, const Signature &sa, const Signature &sq, Mode m,
                    const Options &o) {
    switch (m) {
    case Mode::CQ: return decide_cq_entailment(normalize(t1), normalize(t2), sa, sq, o);
    case Mode::OneTCQ: return decide_1tcq_entailment(normalize(t1), normalize(t2), sa, sq, o);
    case Mode::Deductive: return decide_deductive(t1, t2, sig_union(sa, sq), o);
    case Mode::CQIncons: return decide_cq_entailment_incons(normalize(t1), normalize(t2), sa, sq, o);
    default: throw std::invalid_argument("mode " + mode_name(m) + " cannot serve as base entailment");
    }
}

}  // namespace

Verdict decide(const Problem &p, const Options &o) {
    switch (p.mode) {
    case Mode::Conservative:
        if (!tbox_subset(p.t1, p.t2)) throw PreconditionError("T1 is not contained in T2");
        return decide_base(p.t1, p.t2, p.sa, p.sq, p.base, o);
    case Mode::Inseparable: {
        Verdict v = decide_base(p.t1, p.t2, p.sa, p.sq, p.base, o);
        if (!v.entails) {
            v.reason = "forward:" + v.reason;
            return v;
        }
        Verdict w = decide_base(p.t2, p.t1, p.sa, p.sq, p.base, o);
        if (!w.entails) {
            fail_with(v, w, "backward:" + w.reason);
            return v;
        }
        add_stats(v, w);
        return v;
    }
    default: return decide_base(p.t1, p.t2, p.sa, p.sq, p.mode, o);
    }
}

bool replay(const Reasoner &R1, const Reasoner &R2, const Witness &w) {
    if (!R1.abox_consistent(w.abox) || !R2.abox_consistent(w.abox)) return false;
    return R2.entails(w.abox, w.query, w.answer) && !R1.entails(w.abox, w.query, w.answer);
}

std::string witness_json(const Witness &w) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json ab = nlohmann::ordered_json::array();
    for (const auto &c : w.abox.concepts) ab.push_back(sym_name(c.cname) + "(" + sym_name(c.ind) + ")");
    for (const auto &r : w.abox.roles)
        ab.push_back(sym_name(r.role) + "(" + sym_name(r.a) + "," + sym_name(r.b) + ")");
    j["abox"] = ab;
    j["query"] = w.query.atoms.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(print_cq(w.query));
    nlohmann::ordered_json ans = nlohmann::ordered_json::array();
    for (Sym s : w.answer) ans.push_back(sym_name(s));
    j["answer"] = ans;
    return j.dump();
}

std::string verdict_json(const Verdict &v, Mode mode, bool with_certificate) {
    nlohmann::ordered_json j;
    j["mode"] = mode_name(mode);
    j["entails"] = v.entails;
    j["precheck"] = {{"ri", v.ri}, {"profile", v.profile ? std::string("ok") : v.profile_msg}};
    j["reason"] = v.reason.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(v.reason);
    j["witness"] = v.witness ? nlohmann::ordered_json::parse(witness_json(*v.witness)) : nlohmann::ordered_json();
    if (with_certificate)
        j["certificate"] = v.certificate && v.automaton
                               ? nlohmann::ordered_json::parse(v.certificate->to_json(*v.automaton->alpha))
                               : nlohmann::ordered_json();
    j["stats"] = {{"pipeline_runs", v.pipeline_runs},
                  {"automaton_states", v.automaton_states},
                  {"keys", v.stats.keys},
                  {"evaluations", v.stats.evaluations},
                  {"local_solutions", v.stats.local_solutions},
                  {"outer_rounds", v.stats.outer_rounds}};
    return j.dump();
}

}  // namespace hornce
