#include "hornce/reasoner.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

namespace hornce {

Sym bot_sym() {
    static const Sym b = intern("bot");
    return b;
}

std::vector<SymSet> maximal_sets(std::vector<SymSet> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    std::vector<SymSet> out;
    for (size_t i = 0; i < v.size(); ++i) {
        bool dom = false;
        for (size_t j = 0; j < v.size() && !dom; ++j)
            dom = i != j && set_subset(v[i], v[j]);
        if (!dom) out.push_back(v[i]);
    }
    return out;
}

std::vector<Succ> prune_dominated(std::vector<Succ> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    std::vector<Succ> out;
    for (size_t i = 0; i < v.size(); ++i) {
        bool dom = false;
        for (size_t j = 0; j < v.size() && !dom; ++j)
            dom = i != j && set_subset(v[i].rho, v[j].rho) && set_subset(v[i].type, v[j].type);
        if (!dom) out.push_back(v[i]);
    }
    return out;
}

Reasoner::Reasoner(NormalTBox t) : t_(std::move(t)) {
    concepts_ = t_.concept_names();
    for (Sym r : t_.role_names()) {
        roles_.push_back(mk_role(r));
        roles_.push_back(mk_role(r, true));
    }
    set_normalize(roles_);
    for (const RI &ri : t_.ris) {
        sub_.insert({ri.sub, ri.sup});
        sub_.insert({inv(ri.sub), inv(ri.sup)});
    }
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<std::pair<Role, Role>> add;
        for (auto [a, b] : sub_)
            for (auto it = sub_.lower_bound({b, -1}); it != sub_.end() && it->first == b; ++it)
                if (!sub_.count({a, it->second})) add.push_back({a, it->second});
        for (auto &e : add) grew |= sub_.insert(e).second;
    }
    funcs_ = t_.funcs;
    set_normalize(funcs_);
    for (const NCI &ci : t_.cis) {
        if (ci.kind == NKind::TopSub) tops_.push_back(ci.c);
        else {
            by_lhs_[ci.a].push_back(&ci);
            if (ci.kind == NKind::AndSub && ci.b != ci.a) by_lhs_[ci.b].push_back(&ci);
        }
    }
}

bool Reasoner::role_sub(Role r, Role s) const { return r == s || sub_.count({r, s}) > 0; }

RoleSet Reasoner::up(Role r) const {
    RoleSet out = {r};
    for (auto it = sub_.lower_bound({r, -1}); it != sub_.end() && it->first == r; ++it) out.push_back(it->second);
    set_normalize(out);
    return out;
}

RoleSet Reasoner::up(const RoleSet &rs) const {
    RoleSet out;
    for (Role r : rs) out = set_union(out, up(r));
    return out;
}

bool Reasoner::is_func(Role r) const { return set_has(funcs_, r); }

bool Reasoner::below_func(Role r) const {
    for (Role f : funcs_)
        if (role_sub(r, f)) return true;
    return false;
}

SymSet Reasoner::close_local(SymSet x) const {
    for (Sym c : tops_) set_insert(x, c);
    std::vector<Sym> work(x.begin(), x.end());
    while (!work.empty()) {
        Sym a = work.back();
        work.pop_back();
        auto it = by_lhs_.find(a);
        if (it == by_lhs_.end()) continue;
        for (const NCI *ci : it->second) {
            Sym add = -1;
            if (ci->kind == NKind::SubBot) add = bot_sym();
            else if (ci->kind == NKind::AndSub && set_has(x, ci->a) && set_has(x, ci->b)) add = ci->c;
            if (add >= 0 && !set_has(x, add)) {
                set_insert(x, add);
                work.push_back(add);
            }
        }
    }
    return x;
}

SymSet Reasoner::fwd(const SymSet &x, const RoleSet &edge) const {
    SymSet out;
    for (Sym a : x) {
        auto it = by_lhs_.find(a);
        if (it == by_lhs_.end()) continue;
        for (const NCI *ci : it->second)
            if (ci->kind == NKind::SubForall && set_has(edge, ci->r)) set_insert(out, ci->c);
    }
    return out;
}

int Reasoner::node(const Key &k) const {
    auto it = index_.find(k);
    if (it != index_.end()) return it->second;
    int id = static_cast<int>(keys_.size());
    index_.emplace(k, id);
    keys_.push_back(k);
    Val v;
    v.type = close_local(k.seed);
    vals_.push_back(v);
    users_.emplace_back();
    evaluated_.push_back(0);
    return id;
}

// One update of a node from the current values of its children. Returns true on change.
bool Reasoner::evaluate(int id, std::vector<int> &work, std::vector<char> &queued) const {
    const Key key = keys_[id];
    SymSet x = close_local(set_union(key.seed, vals_[id].type));
    RoleSet edge_up;
    for (Role s : key.edge) edge_up.push_back(inv(s));
    set_normalize(edge_up);

    SymSet merged;
    RoleSet extra;
    std::vector<std::pair<RoleSet, int>> kids;
    bool changed_x = true;
    while (changed_x) {
        changed_x = false;
        merged.clear();
        extra.clear();
        kids.clear();
        std::vector<std::pair<Role, Sym>> reqs;
        for (Sym a : x) {
            auto it = by_lhs_.find(a);
            if (it == by_lhs_.end()) continue;
            for (const NCI *ci : it->second) {
                if (ci->kind != NKind::SubExists) continue;
                bool merge = false;
                if (!key.root)
                    for (Role f : funcs_)
                        if (role_sub(ci->r, f) && set_has(edge_up, f)) merge = true;
                if (merge) {
                    set_insert(merged, ci->c);
                    extra = set_union(extra, up(inv(ci->r)));
                } else {
                    reqs.push_back({ci->r, ci->c});
                }
            }
        }
        std::sort(reqs.begin(), reqs.end());
        reqs.erase(std::unique(reqs.begin(), reqs.end()), reqs.end());
        std::vector<int> grp(reqs.size());
        std::iota(grp.begin(), grp.end(), 0);
        std::function<int(int)> find = [&](int i) { return grp[i] == i ? i : grp[i] = find(grp[i]); };
        for (Role f : funcs_) {
            int first = -1;
            for (size_t i = 0; i < reqs.size(); ++i) {
                if (!role_sub(reqs[i].first, f)) continue;
                if (first < 0) first = static_cast<int>(i);
                else grp[find(static_cast<int>(i))] = find(first);
            }
        }
        std::map<int, std::pair<RoleSet, SymSet>> groups;
        for (size_t i = 0; i < reqs.size(); ++i) {
            auto &g = groups[find(static_cast<int>(i))];
            set_insert(g.first, reqs[i].first);
            set_insert(g.second, reqs[i].second);
        }
        SymSet gained;
        for (auto &[gid, g] : groups) {
            RoleSet e = up(g.first);
            int child;
            while (true) {
                SymSet seed = set_union(g.second, fwd(x, e));
                child = node(Key{seed, {}, e, false});
                if (std::find(users_[child].begin(), users_[child].end(), id) == users_[child].end())
                    users_[child].push_back(id);
                if (set_subset(vals_[child].extra, e)) break;
                e = set_union(e, up(vals_[child].extra));
            }
            kids.push_back({e, child});
            gained = set_union(gained, vals_[child].back);
            if (set_has(vals_[child].type, bot_sym())) set_insert(gained, bot_sym());
        }
        if (!set_subset(gained, x)) {
            x = close_local(set_union(x, gained));
            changed_x = true;
        }
    }
    SymSet back = merged;
    for (Sym a : x) {
        auto it = by_lhs_.find(a);
        if (it == by_lhs_.end()) continue;
        for (const NCI *ci : it->second)
            if (ci->kind == NKind::SubForall && set_has(edge_up, ci->r)) set_insert(back, ci->c);
    }
    // Children that were never evaluated are scheduled.
    if (queued.size() < vals_.size()) queued.resize(vals_.size(), 0);
    for (auto &[e, c] : kids)
        if (!evaluated_[c] && !queued[c]) {
            queued[c] = 1;
            work.push_back(c);
        }
    evaluated_[id] = 1;
    Val &v = vals_[id];
    bool changed = v.type != x || v.back != back || v.extra != extra;
    v.type = std::move(x);
    v.back = std::move(back);
    v.extra = std::move(extra);
    v.kids = std::move(kids);
    return changed;
}

int Reasoner::solve_root(const SymSet &seed) const {
    int root = node(Key{close_local(seed), {}, {}, true});
    std::vector<int> work;
    std::vector<char> queued(vals_.size(), 0);
    // Every node that has never been evaluated starts on the worklist.
    if (!evaluated_[root]) {
        work.push_back(root);
        queued[root] = 1;
    }
    while (!work.empty()) {
        int id = work.back();
        work.pop_back();
        if (queued.size() < vals_.size()) queued.resize(vals_.size(), 0);
        queued[id] = 0;
        if (evaluate(id, work, queued)) {
            if (queued.size() < vals_.size()) queued.resize(vals_.size(), 0);
            for (int u : users_[id])
                if (!queued[u]) {
                    queued[u] = 1;
                    work.push_back(u);
                }
        }
    }
    return root;
}

SymSet Reasoner::type_of(const SymSet &seed) const {
    std::lock_guard<std::mutex> lock(mu_);
    return vals_[solve_root(seed)].type;
}

bool Reasoner::subsumes(const SymSet &t, Sym a) const {
    SymSet ty = type_of(t);
    return set_has(ty, a) || set_has(ty, bot_sym());
}

bool Reasoner::consistent(const SymSet &t) const { return !subsumes(t, bot_sym()); }

size_t Reasoner::expand_nodes() const {
    std::lock_guard<std::mutex> lock(mu_);
    return keys_.size();
}

std::vector<SymSet> Reasoner::succ(const SymSet &t, Role r) const {
    std::lock_guard<std::mutex> lock(mu_);
    int root = solve_root(t);
    std::vector<SymSet> out;
    for (auto &[e, c] : vals_[root].kids)
        if (set_has(e, r)) out.push_back(vals_[c].type);
    return maximal_sets(out);
}

std::vector<Succ> Reasoner::children(const SymSet &t, const RoleSet &rho_in) const {
    std::vector<std::pair<RoleSet, SymSet>> kids;
    {
        std::lock_guard<std::mutex> lock(mu_);
        int root = solve_root(t);
        for (auto &[e, c] : vals_[root].kids) kids.push_back({e, vals_[c].type});
    }
    RoleSet back_roles;
    for (Role s : rho_in) back_roles.push_back(inv(s));
    set_normalize(back_roles);
    std::vector<Succ> out;
    for (Role r : roles_) {
        bool suppressed = false;
        for (Role f : funcs_)
            if (role_sub(r, f) && set_has(back_roles, f)) suppressed = true;
        if (suppressed) continue;
        std::vector<SymSet> cands;
        for (auto &[e, ty] : kids)
            if (set_has(e, r)) cands.push_back(ty);
        for (SymSet &ty : maximal_sets(cands)) out.push_back({up(r), ty});
    }
    return prune_dominated(out);
}

ChaseResult Reasoner::chase(const ABox &a) const {
    ChaseResult res;
    for (Sym i : a.individuals()) res.tp[i];
    for (const auto &c : a.concepts) set_insert(res.tp[c.ind], c.cname);
    auto add_edge = [&](Sym x, Role r, Sym y) {
        bool grew = false;
        for (Role s : up(r)) {
            grew |= res.edges.insert({x, s, y}).second;
            grew |= res.edges.insert({y, inv(s), x}).second;
        }
        return grew;
    };
    for (const auto &r : a.roles) add_edge(r.a, mk_role(r.role), r.b);
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto &[ind, ty] : res.tp) {
            SymSet nt = type_of(ty);
            if (nt != ty) {
                ty = nt;
                changed = true;
            }
        }
        std::vector<std::tuple<Sym, Role, Sym>> new_edges;
        for (auto [b, s, x] : res.edges) {
            const SymSet tb = res.tp[b];
            for (Sym c : tb) {
                auto it = by_lhs_.find(c);
                if (it == by_lhs_.end()) continue;
                for (const NCI *ci : it->second) {
                    bool fire = false;
                    if (ci->kind == NKind::SubForall && s == ci->r) fire = true;
                    if (ci->kind == NKind::SubExists && is_func(s) && role_sub(ci->r, s)) {
                        fire = true;
                        new_edges.push_back({b, ci->r, x});
                    }
                    if (fire && !set_has(res.tp[x], ci->c)) {
                        set_insert(res.tp[x], ci->c);
                        changed = true;
                    }
                }
            }
        }
        for (auto [x, r, y] : new_edges) changed |= add_edge(x, r, y);
    }
    for (auto &[ind, ty] : res.tp)
        if (set_has(ty, bot_sym())) res.consistent = false;
    for (Role f : funcs_) {
        std::map<Sym, std::set<Sym>> targets;
        for (auto [x, s, y] : res.edges)
            if (s == f) targets[x].insert(y);
        for (auto &[x, ys] : targets)
            if (ys.size() > 1) res.consistent = false;
    }
    return res;
}

bool Reasoner::abox_consistent(const ABox &a) const { return chase(a).consistent; }

bool Reasoner::instance(const ABox &a, Sym ind, Sym c) const {
    ChaseResult ch = chase(a);
    if (!ch.consistent) throw InconsistentABox();
    auto it = ch.tp.find(ind);
    return it != ch.tp.end() && set_has(it->second, c);
}

std::vector<Succ> Reasoner::abox_children(const ChaseResult &ch, Sym ind) const {
    std::vector<Succ> out;
    const SymSet &ty = ch.tp.at(ind);
    for (Role r : roles_) {
        bool suppressed = false;
        for (Role f : funcs_) {
            if (!role_sub(r, f)) continue;
            auto it = ch.edges.lower_bound({ind, f, -1});
            if (it != ch.edges.end() && std::get<0>(*it) == ind && std::get<1>(*it) == f) suppressed = true;
        }
        if (suppressed) continue;
        for (SymSet &t : succ(ty, r)) out.push_back({up(r), t});
    }
    return prune_dominated(out);
}

std::vector<SymSet> Reasoner::abox_succ(const ABox &a, Sym ind, Role r) const {
    ChaseResult ch = chase(a);
    if (!ch.consistent) throw InconsistentABox();
    for (Role f : funcs_) {
        if (!role_sub(r, f)) continue;
        for (auto [x, s, y] : ch.edges)
            if (x == ind && s == f) return {};
    }
    return succ(ch.tp.at(ind), r);
}

namespace {

// Lazily expanded universal model used for query matching.
struct LazyModel {
    const Reasoner &R;
    const ChaseResult &ch;
    size_t depth_cap;

    struct Elem {
        Sym ind = -1;
        int parent = -1;
        RoleSet rho;
        SymSet type;
        size_t depth = 0;
        bool expanded = false;
        std::vector<int> kids;
    };
    std::vector<Elem> elems;
    std::map<Sym, int> by_ind;

    LazyModel(const Reasoner &r, const ChaseResult &c, size_t cap) : R(r), ch(c), depth_cap(cap) {
        for (auto &[i, ty] : ch.tp) {
            by_ind[i] = static_cast<int>(elems.size());
            elems.push_back({i, -1, {}, ty, 0});
        }
    }

    int add_detached(const Succ &s) {
        elems.push_back({-1, -1, s.rho, s.type, 1});
        return static_cast<int>(elems.size()) - 1;
    }

    const std::vector<int> &kids(int e) {
        if (!elems[e].expanded) {
            elems[e].expanded = true;
            if (elems[e].depth < depth_cap) {
                std::vector<Succ> cs = elems[e].ind >= 0 ? R.abox_children(ch, elems[e].ind)
                                                          : R.children(elems[e].type, elems[e].rho);
                for (const Succ &s : cs) {
                    elems.push_back({-1, e, s.rho, s.type, elems[e].depth + 1});
                    elems[e].kids.push_back(static_cast<int>(elems.size()) - 1);
                }
            }
        }
        return elems[e].kids;
    }

    // Elements e' with (e, e') in role r; `floor` forbids moving above that element.
    std::vector<int> neighbors(int e, Role r, int floor) {
        std::vector<int> out;
        if (elems[e].ind >= 0) {
            Sym a = elems[e].ind;
            for (auto it = ch.edges.lower_bound({a, r, -1});
                 it != ch.edges.end() && std::get<0>(*it) == a && std::get<1>(*it) == r; ++it)
                out.push_back(by_ind.at(std::get<2>(*it)));
        }
        for (int k : kids(e))
            if (set_has(elems[k].rho, r)) out.push_back(k);
        if (elems[e].ind < 0 && elems[e].parent >= 0 && e != floor && set_has(elems[e].rho, inv(r)))
            out.push_back(elems[e].parent);
        return out;
    }
};

}  // namespace

std::set<std::vector<Sym>> Reasoner::certain_answers(const ABox &a, const CQ &q) const {
    ChaseResult ch = chase(a);
    if (!ch.consistent) throw InconsistentABox();
    std::vector<Sym> vars = q.vars();
    size_t m = vars.size();

    // Reachable (incoming roles, type) pairs of anonymous elements.
    std::set<Succ> reach;
    std::vector<Succ> stack;
    for (auto &[i, ty] : ch.tp)
        for (const Succ &s : abox_children(ch, i))
            if (reach.insert(s).second) stack.push_back(s);
    while (!stack.empty()) {
        Succ s = stack.back();
        stack.pop_back();
        for (const Succ &c : children(s.type, s.rho))
            if (reach.insert(c).second) stack.push_back(c);
    }
    size_t depth_cap = m * (2 + roles_.size() * reach.size()) + 2 * m;
    LazyModel model(*this, ch, depth_cap);

    // Connected components of the query.
    std::map<Sym, int> comp;
    for (Sym v : vars) comp[v] = -1;
    int ncomp = 0;
    for (Sym v : vars) {
        if (comp[v] >= 0) continue;
        std::vector<Sym> st = {v};
        comp[v] = ncomp;
        while (!st.empty()) {
            Sym u = st.back();
            st.pop_back();
            for (const Atom &at : q.atoms) {
                if (!at.is_role) continue;
                Sym w = at.x == u ? at.y : at.y == u ? at.x : -1;
                if (w >= 0 && comp[w] < 0) {
                    comp[w] = ncomp;
                    st.push_back(w);
                }
            }
        }
        ++ncomp;
    }

    auto is_answer = [&](Sym v) { return std::find(q.answer.begin(), q.answer.end(), v) != q.answer.end(); };

    // Per component: set of projections onto its answer variables.
    std::vector<std::set<std::map<Sym, Sym>>> proj(ncomp);
    for (int c = 0; c < ncomp; ++c) {
        std::vector<Sym> cv;
        for (Sym v : vars)
            if (comp[v] == c) cv.push_back(v);
        std::vector<const Atom *> catoms;
        for (const Atom &at : q.atoms)
            if (comp[at.x] == c) catoms.push_back(&at);
        bool has_answer = std::any_of(cv.begin(), cv.end(), is_answer);

        std::map<Sym, int> asg;
        bool found_boolean = false;
        std::function<void(int)> search = [&](int floor) {
            if (found_boolean) return;
            for (const Atom *at : catoms) {
                auto ix = asg.find(at->x);
                if (ix == asg.end()) continue;
                if (!at->is_role && !set_has(model.elems[ix->second].type, at->pred)) return;
                if (at->is_role) {
                    auto iy = asg.find(at->y);
                    if (iy == asg.end()) continue;
                    auto nb = model.neighbors(ix->second, mk_role(at->pred), floor);
                    if (std::find(nb.begin(), nb.end(), iy->second) == nb.end()) return;
                }
            }
            for (const Atom *at : catoms)
                if (!at->is_role && asg.count(at->x) && !set_has(model.elems[asg[at->x]].type, at->pred)) return;
            if (asg.size() == cv.size()) {
                std::map<Sym, Sym> p;
                for (Sym v : cv)
                    if (is_answer(v)) p[v] = model.elems[asg[v]].ind;
                proj[c].insert(p);
                if (!has_answer) found_boolean = true;
                return;
            }
            // Extend along a role atom touching an assigned variable.
            for (const Atom *at : catoms) {
                if (!at->is_role) continue;
                bool ax = asg.count(at->x), ay = asg.count(at->y);
                if (ax == ay) continue;
                Sym from = ax ? at->x : at->y, to = ax ? at->y : at->x;
                Role r = ax ? mk_role(at->pred) : inv(mk_role(at->pred));
                for (int e : model.neighbors(asg[from], r, floor)) {
                    if (is_answer(to) && model.elems[e].ind < 0) continue;
                    asg[to] = e;
                    search(floor);
                    asg.erase(to);
                    if (found_boolean) return;
                }
                return;
            }
        };

        std::vector<Sym> starts = cv;
        if (has_answer) starts = {*std::find_if(cv.begin(), cv.end(), is_answer)};
        for (Sym v : starts) {
            for (auto &[ind, e] : model.by_ind) {
                asg[v] = e;
                search(-1);
                asg.erase(v);
            }
            if (has_answer || found_boolean) continue;
            for (const Succ &s : reach) {
                int e = model.add_detached(s);
                asg[v] = e;
                search(e);
                asg.erase(v);
                if (found_boolean) break;
            }
            if (found_boolean) break;
        }
        if (proj[c].empty()) return {};
    }

    std::set<std::vector<Sym>> out;
    std::function<void(int, std::map<Sym, Sym> &)> combine = [&](int c, std::map<Sym, Sym> &acc) {
        if (c == ncomp) {
            std::vector<Sym> tup;
            for (Sym v : q.answer) tup.push_back(acc.at(v));
            out.insert(tup);
            return;
        }
        for (const auto &p : proj[c]) {
            std::map<Sym, Sym> saved = acc;
            acc.insert(p.begin(), p.end());
            combine(c + 1, acc);
            acc = saved;
        }
    };
    std::map<Sym, Sym> acc;
    combine(0, acc);
    return out;
}

bool Reasoner::entails(const ABox &a, const CQ &q, const std::vector<Sym> &tuple) const {
    return certain_answers(a, q).count(tuple) > 0;
}

}  // namespace hornce
