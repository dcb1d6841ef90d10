#include <algorithm>
#include <chrono>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>

#include "hornce/automata.hpp"

namespace hornce {
namespace {

struct Bits {
    std::vector<uint64_t> w;
    Bits() = default;
    explicit Bits(size_t n) : w((n + 63) / 64, 0) {}
    bool test(int i) const { return (w[static_cast<size_t>(i) >> 6] >> (i & 63)) & 1u; }
    void set(int i) { w[static_cast<size_t>(i) >> 6] |= uint64_t{1} << (i & 63); }
    bool any() const {
        for (uint64_t x : w)
            if (x) return true;
        return false;
    }
    bool subset_of(const Bits &o) const {
        for (size_t i = 0; i < w.size(); ++i)
            if (w[i] & ~o.w[i]) return false;
        return true;
    }
    Bits &operator|=(const Bits &o) {
        for (size_t i = 0; i < w.size(); ++i) w[i] |= o.w[i];
        return *this;
    }
    Bits minus(const Bits &o) const {
        Bits r = *this;
        for (size_t i = 0; i < w.size(); ++i) r.w[i] &= ~o.w[i];
        return r;
    }
    template <class F>
    void each(F f) const {
        for (size_t i = 0; i < w.size(); ++i)
            for (uint64_t x = w[i]; x; x &= x - 1) f(static_cast<int>(i * 64 + static_cast<size_t>(__builtin_ctzll(x))));
    }
    bool operator==(const Bits &o) const { return w == o.w; }
    bool operator<(const Bits &o) const { return w < o.w; }
};

using Pairs = std::vector<std::pair<int, int>>;

void canon(Pairs &p) {
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
}

// What a subtree asks of its parent: states U the parent must satisfy and the non-accepting
// connections R from entry states to requested states.
struct Summ {
    Bits U;
    Pairs R;
    bool leq(const Summ &o) const { return U.subset_of(o.U) && std::includes(o.R.begin(), o.R.end(), R.begin(), R.end()); }
    bool operator==(const Summ &o) const { return U == o.U && R == o.R; }
    bool operator<(const Summ &o) const { return std::tie(U, R) < std::tie(o.U, o.R); }
};

struct Key {
    int rep;
    Bits D, O;
    bool root;
    bool operator<(const Key &o) const { return std::tie(rep, D, O, root) < std::tie(o.rep, o.D, o.O, o.root); }
};

struct Down {
    int owner;
    bool all;
    int n;
    int q;
    bool operator<(const Down &o) const { return std::tie(owner, all, n, q) < std::tie(o.owner, o.all, o.n, o.q); }
    bool operator==(const Down &o) const { return std::tie(owner, all, n, q) == std::tie(o.owner, o.all, o.n, o.q); }
};

struct LocalSol {
    Label known, val;
    Bits S;
    Pairs here;  // between non-accepting states only
    Pairs up;
    std::vector<Down> down;
};

// Labels only feed the certificate, so they take no part in the comparison.
bool dominates(const LocalSol &a, const LocalSol &b) {
    return a.S.subset_of(b.S) &&
           std::includes(b.here.begin(), b.here.end(), a.here.begin(), a.here.end()) &&
           std::includes(b.up.begin(), b.up.end(), a.up.begin(), a.up.end()) &&
           std::includes(b.down.begin(), b.down.end(), a.down.begin(), a.down.end());
}

struct Child {
    int rep;
    Bits D;
    Pairs send;  // (owner at the parent, state sent down)
};

struct Just {
    Label label;
    std::vector<std::pair<int, Summ>> kids;
};

struct Entry {
    Summ s;
    Just j;
    bool dominated = false;
};

struct Pend {
    int owner;
    int f;
};

std::vector<std::vector<int>> state_graph(const TwoWayAutomaton &a) {
    std::vector<std::vector<int>> g(a.num_states());
    for (size_t q = 0; q < a.num_states(); ++q) {
        std::vector<int> stack = {a.delta[q]};
        std::set<int> seen;
        while (!stack.empty()) {
            int f = stack.back();
            stack.pop_back();
            if (!seen.insert(f).second) continue;
            const FNode &n = a.f[static_cast<size_t>(f)];
            if (n.state >= 0) g[q].push_back(n.state);
            for (int k : n.kids) stack.push_back(k);
        }
        std::sort(g[q].begin(), g[q].end());
        g[q].erase(std::unique(g[q].begin(), g[q].end()), g[q].end());
    }
    return g;
}

std::vector<int> sccs(const std::vector<std::vector<int>> &g, const std::vector<char> &skip) {
    int n = static_cast<int>(g.size()), counter = 0, comps = 0;
    std::vector<int> idx(n, -1), low(n, 0), comp(n, -1), stack;
    std::vector<char> on(n, 0);
    std::function<void(int)> dfs = [&](int v) {
        idx[v] = low[v] = counter++;
        stack.push_back(v);
        on[v] = 1;
        for (int w : g[v]) {
            if (skip[w]) continue;
            if (idx[w] < 0) {
                dfs(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on[w]) {
                low[v] = std::min(low[v], idx[w]);
            }
        }
        if (low[v] == idx[v]) {
            int w;
            do {
                w = stack.back();
                stack.pop_back();
                on[w] = 0;
                comp[w] = comps;
            } while (w != v);
            ++comps;
        }
    };
    for (int v = 0; v < n; ++v)
        if (!skip[v] && idx[v] < 0) dfs(v);
    return comp;
}

bool nontrivial(const std::vector<std::vector<int>> &g, const std::vector<int> &comp, int v) {
    for (int w : g[v])
        if (comp[w] == comp[v]) return true;
    return false;
}

// Accepting states: those whose component contains no priority-1 state.
std::vector<char> accepting_states(const TwoWayAutomaton &a) {
    size_t n = a.num_states();
    for (int p : a.priority)
        if (p < 0 || p > 1) throw std::invalid_argument("priorities must be 0 or 1");
    auto g = state_graph(a);
    auto comp = sccs(g, std::vector<char>(n, 0));
    std::vector<char> bad_comp(n, 0);
    for (size_t q = 0; q < n; ++q)
        if (a.priority[q] == 1 && nontrivial(g, comp, static_cast<int>(q))) bad_comp[static_cast<size_t>(comp[q])] = 1;
    std::vector<char> skip(n, 0);
    for (size_t q = 0; q < n; ++q) skip[q] = !bad_comp[static_cast<size_t>(comp[q])] || a.priority[q] == 1;
    auto inner = sccs(g, skip);
    for (size_t q = 0; q < n; ++q) {
        if (skip[q]) continue;
        for (int w : g[q])
            if (!skip[static_cast<size_t>(w)] && inner[static_cast<size_t>(w)] == inner[q])
                throw std::invalid_argument("automaton is not weak: cycle avoiding priority 1 at " + a.names[q]);
    }
    std::vector<char> acc(n, 1);
    for (size_t q = 0; q < n; ++q) acc[q] = !bad_comp[static_cast<size_t>(comp[q])];
    return acc;
}

class Engine {
public:
    Engine(const TwoWayAutomaton &a, const RegularTreeRep *tree, const EmptinessLimits &lim)
        : a_(a), tree_(tree), lim_(lim), n_(a.num_states()), acc_(accepting_states(a)),
          start_(std::chrono::steady_clock::now()) {
        nonacc_ = Bits(n_);
        for (size_t q = 0; q < n_; ++q)
            if (!acc_[q]) nonacc_.set(static_cast<int>(q));
        full_.reset();
        for (size_t i = 0; i < a.alpha->size(); ++i) full_.set(i);
    }

    EmptinessResult run() {
        Bits d0(n_);
        d0.set(a_.initial);
        int root = key_of(tree_ ? tree_->root : -1, d0, Bits(n_), true);
        for (;;) {
            ++stats_.outer_rounds;
            for (auto &e : Y_) e.clear();
            deps_.assign(keys_.size(), {});
            work_.clear();
            queued_.assign(keys_.size(), 0);
            for (size_t k = 0; k < keys_.size(); ++k) push(static_cast<int>(k));
            while (!work_.empty()) {
                int k = work_.front();
                work_.pop_front();
                queued_[static_cast<size_t>(k)] = 0;
                evaluate(k);
            }
            bool same = true;
            for (size_t k = 0; k < keys_.size(); ++k) {
                std::vector<Summ> y = antichain(static_cast<int>(k));
                if (!has_z_[k] ? !(y.size() == 1 && y[0] == top()) : y != Z_[k]) same = false;
                Z_[k] = std::move(y);
                has_z_[k] = 1;
            }
            if (same) break;
        }
        EmptinessResult res;
        res.empty = Z_[static_cast<size_t>(root)].empty();
        if (!res.empty && !tree_) res.certificate = extract(root);
        stats_.keys = keys_.size();
        stats_.seconds = elapsed();
        res.stats = stats_;
        return res;
    }

private:
    const TwoWayAutomaton &a_;
    const RegularTreeRep *tree_;
    EmptinessLimits lim_;
    size_t n_;
    std::vector<char> acc_;
    Bits nonacc_;
    Label full_;
    std::chrono::steady_clock::time_point start_;
    EmptinessStats stats_;

    std::vector<Key> keys_;
    std::map<Key, int> key_id_;
    std::vector<std::vector<Entry>> Y_;
    std::vector<std::vector<Summ>> Z_;
    std::vector<char> has_z_;
    std::vector<std::set<int>> deps_;
    std::deque<int> work_;
    std::vector<char> queued_;
    std::map<std::tuple<int, Bits, bool>, std::vector<LocalSol>> phase1_;
    int cur_ = -1;
    std::set<Bits> expanded_;

    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

    void budget() {
        if (lim_.seconds > 0 && elapsed() > lim_.seconds) throw ResourceLimit("emptiness check exceeded its time budget");
    }

    Summ top() const { return Summ{Bits(n_), {}}; }

    void push(int k) {
        if (queued_[static_cast<size_t>(k)]) return;
        queued_[static_cast<size_t>(k)] = 1;
        work_.push_back(k);
    }

    int key_of(int rep, const Bits &D, const Bits &O, bool root) {
        Key k{rep, D, O, root};
        auto it = key_id_.find(k);
        if (it != key_id_.end()) return it->second;
        if (keys_.size() >= lim_.max_keys) throw ResourceLimit("emptiness check exceeded its key budget");
        int id = static_cast<int>(keys_.size());
        keys_.push_back(k);
        key_id_.emplace(k, id);
        Y_.emplace_back();
        Z_.emplace_back();
        has_z_.push_back(0);
        deps_.emplace_back();
        queued_.push_back(0);
        push(id);
        return id;
    }

    std::vector<Summ> antichain(int k) const {
        std::vector<Summ> out;
        for (const Entry &e : Y_[static_cast<size_t>(k)])
            if (!e.dominated) out.push_back(e.s);
        std::sort(out.begin(), out.end());
        return out;
    }

    std::vector<Summ> lookup(int k, bool use_z) {
        if (use_z) {
            if (!has_z_[static_cast<size_t>(k)]) return {top()};
            return Z_[static_cast<size_t>(k)];
        }
        deps_[static_cast<size_t>(k)].insert(cur_);
        std::vector<Summ> out;
        for (const Entry &e : Y_[static_cast<size_t>(k)])
            if (!e.dominated) out.push_back(e.s);
        return out;
    }

    bool add_entry(int k, Summ s, Just j) {
        auto &es = Y_[static_cast<size_t>(k)];
        for (const Entry &e : es)
            if (!e.dominated && e.s.leq(s)) return false;
        for (Entry &e : es)
            if (!e.dominated && s.leq(e.s)) e.dominated = true;
        es.push_back({std::move(s), std::move(j), false});
        return true;
    }

    // Phase 1: satisfy the transition formulas of the states in D at one node, children ignored.
    const std::vector<LocalSol> &local_solutions(int rep, const Bits &D, bool root) {
        auto mk = std::make_tuple(rep, D, root);
        auto it = phase1_.find(mk);
        if (it != phase1_.end()) return it->second;
        LocalSol st;
        st.S = D;
        if (rep >= 0) {
            st.known = full_;
            st.val = tree_->labels[static_cast<size_t>(rep)];
        }
        std::vector<Pend> pend;
        D.each([&](int q) { pend.push_back({q, a_.delta[static_cast<size_t>(q)]}); });
        std::vector<LocalSol> out;
        resolve(std::move(st), std::move(pend), root, out);
        return phase1_.emplace(mk, std::move(out)).first->second;
    }

    void insert_sol(std::vector<LocalSol> &out, LocalSol st) {
        canon(st.here);
        canon(st.up);
        std::sort(st.down.begin(), st.down.end());
        st.down.erase(std::unique(st.down.begin(), st.down.end()), st.down.end());
        for (const LocalSol &o : out)
            if (dominates(o, st)) return;
        out.erase(std::remove_if(out.begin(), out.end(), [&](const LocalSol &o) { return dominates(st, o); }),
                  out.end());
        out.push_back(std::move(st));
        ++stats_.local_solutions;
    }

    void add_state(LocalSol &st, std::vector<Pend> &pend, int owner, int q) {
        if (!acc_[static_cast<size_t>(owner)] && !acc_[static_cast<size_t>(q)]) st.here.push_back({owner, q});
        if (!st.S.test(q)) {
            st.S.set(q);
            pend.push_back({q, a_.delta[static_cast<size_t>(q)]});
        }
    }

    enum Tri { kFalse, kTrue, kOpen };

    // Static value of f under the partial label; kTrue only when f holds without any new obligation.
    Tri status(int f, const LocalSol &st, bool root, int owner, int depth) const {
        const FNode &x = a_.f[static_cast<size_t>(f)];
        switch (x.kind) {
        case FKind::True: return kTrue;
        case FKind::False: return kFalse;
        case FKind::And:
        case FKind::Or: {
            if (depth <= 0) return kOpen;
            bool conj = x.kind == FKind::And;
            Tri res = conj ? kTrue : kFalse;
            for (int k : x.kids) {
                Tri t = status(k, st, root, owner, depth - 1);
                if (t == (conj ? kFalse : kTrue)) return t;
                if (t == kOpen) res = kOpen;
            }
            return res;
        }
        case FKind::Ite: {
            if (st.known[static_cast<size_t>(x.atom)])
                return status(x.kids[st.val[static_cast<size_t>(x.atom)] ? 0 : 1], st, root, owner, depth);
            if (depth <= 0) return kOpen;
            Tri a = status(x.kids[0], st, root, owner, depth - 1);
            if (a == kOpen) return kOpen;
            return status(x.kids[1], st, root, owner, depth - 1) == a ? a : kOpen;
        }
        case FKind::Here:
            return st.S.test(x.state) && (acc_[static_cast<size_t>(owner)] || acc_[static_cast<size_t>(x.state)]) ? kTrue
                                                                                                                   : kOpen;
        case FKind::UpEx: return root ? kFalse : kOpen;
        case FKind::UpAll: return root ? kTrue : kOpen;
        default: return kOpen;
        }
    }

    static constexpr int kDepth = 10;

    // Local search: deterministic steps and unit choices first, then branch on the narrowest open item.
    void resolve(LocalSol st, std::vector<Pend> pend, bool root, std::vector<LocalSol> &out) {
        ++stats_.evaluations;
        if ((stats_.evaluations & 0xfff) == 0) budget();
        std::vector<Pend> deferred;
        bool changed = false;
        for (;;) {
            while (!pend.empty()) {
                Pend p = pend.back();
                pend.pop_back();
                const FNode &x = a_.f[static_cast<size_t>(p.f)];
                switch (x.kind) {
                case FKind::True: break;
                case FKind::False: return;
                case FKind::And:
                    for (int k : x.kids) pend.push_back({p.owner, k});
                    break;
                case FKind::Or: {
                    std::vector<int> live;
                    bool done = false;
                    for (int k : x.kids) {
                        Tri t = status(k, st, root, p.owner, kDepth);
                        if (t == kTrue) done = true;
                        if (t == kOpen) live.push_back(k);
                    }
                    if (done) break;
                    if (live.empty()) return;
                    if (live.size() == 1)
                        pend.push_back({p.owner, live[0]});
                    else
                        deferred.push_back(p);
                    break;
                }
                case FKind::Ite: {
                    size_t at = static_cast<size_t>(x.atom);
                    if (st.known[at]) {
                        pend.push_back({p.owner, x.kids[st.val[at] ? 0 : 1]});
                        break;
                    }
                    Tri yes = status(x.kids[0], st, root, p.owner, kDepth);
                    Tri no = status(x.kids[1], st, root, p.owner, kDepth);
                    if (yes == kFalse && no == kFalse) return;
                    if (yes == kTrue && no == kTrue) break;
                    if (yes == kFalse || no == kFalse) {
                        bool v = no == kFalse;
                        st.known.set(at);
                        st.val.set(at, v);
                        changed = true;
                        pend.push_back({p.owner, x.kids[v ? 0 : 1]});
                    } else {
                        deferred.push_back(p);
                    }
                    break;
                }
                case FKind::Here: add_state(st, pend, p.owner, x.state); break;
                case FKind::UpEx:
                    if (root) return;
                    st.up.push_back({p.owner, x.state});
                    break;
                case FKind::UpAll:
                    if (!root) st.up.push_back({p.owner, x.state});
                    break;
                case FKind::DownEx:
                    if (x.n > 0) st.down.push_back({p.owner, false, x.n, x.state});
                    break;
                case FKind::DownAll: st.down.push_back({p.owner, true, x.n, x.state}); break;
                }
            }
            if (!changed || deferred.empty()) break;
            changed = false;
            pend.swap(deferred);
        }
        if (deferred.empty()) {
            insert_sol(out, std::move(st));
            return;
        }
        // Branch on the open item with the fewest live alternatives.
        size_t best = 0;
        std::vector<int> best_opts;
        for (size_t i = 0; i < deferred.size(); ++i) {
            const FNode &x = a_.f[static_cast<size_t>(deferred[i].f)];
            std::vector<int> opts;
            if (x.kind == FKind::Ite) {
                opts = {-1, -2};
            } else {
                for (int k : x.kids)
                    if (status(k, st, root, deferred[i].owner, kDepth) != kFalse) opts.push_back(k);
            }
            if (best_opts.empty() || opts.size() < best_opts.size()) {
                best = i;
                best_opts = opts;
            }
        }
        Pend p = deferred[best];
        deferred.erase(deferred.begin() + static_cast<long>(best));
        const FNode &x = a_.f[static_cast<size_t>(p.f)];
        for (int o : best_opts) {
            LocalSol s2 = st;
            std::vector<Pend> p2 = deferred;
            if (x.kind == FKind::Ite) {
                bool v = o == -2;
                s2.known.set(static_cast<size_t>(x.atom));
                s2.val.set(static_cast<size_t>(x.atom), v);
                p2.push_back({p.owner, x.kids[v ? 0 : 1]});
            } else {
                p2.push_back({p.owner, o});
            }
            resolve(std::move(s2), std::move(p2), root, out);
        }
    }

    // Breakpoint: with no pending obligations every non-accepting entry state starts a new one.
    Bits o_eff(const Key &k) const {
        if (k.O.any()) return k.O;
        Bits b = k.D;
        for (size_t i = 0; i < b.w.size(); ++i) b.w[i] &= nonacc_.w[i];
        return b;
    }

    // Non-accepting states of S reachable from 'from' along the given edges.
    Bits reach(const Bits &from, const Pairs &edges) const {
        Bits r = from;
        std::vector<int> stack;
        from.each([&](int q) { stack.push_back(q); });
        while (!stack.empty()) {
            int q = stack.back();
            stack.pop_back();
            for (auto it = std::lower_bound(edges.begin(), edges.end(), std::make_pair(q, -1));
                 it != edges.end() && it->first == q; ++it)
                if (!r.test(it->second)) {
                    r.set(it->second);
                    stack.push_back(it->second);
                }
        }
        return r;
    }

    Bits sent_from(const Child &c, const Bits &r) const {
        Bits o(n_);
        for (auto [q, d] : c.send)
            if (!acc_[static_cast<size_t>(q)] && !acc_[static_cast<size_t>(d)] && r.test(q)) o.set(d);
        return o;
    }

    void evaluate(int k) {
        budget();
        cur_ = k;
        Key key = keys_[static_cast<size_t>(k)];
        expanded_.clear();
        expanded_.insert(key.D);
        std::vector<LocalSol> sols = local_solutions(key.rep, key.D, key.root);
        for (const LocalSol &s : sols) solve(k, key, s);
        cur_ = -1;
    }

    void solve(int k, const Key &key, const LocalSol &sol) {
        Bits r0 = reach(o_eff(key), sol.here);
        auto on_config = [&](std::vector<Child> &cs) {
            std::vector<Bits> o(cs.size());
            for (size_t i = 0; i < cs.size(); ++i) o[i] = sent_from(cs[i], r0);
            pick(k, key, sol, cs, o);
        };
        if (key.rep >= 0)
            fixed_configs(key, sol, r0, on_config);
        else
            free_configs(key, sol, r0, on_config);
    }

    bool viable(const Key &key, const Child &c, const Bits &r0) {
        if (!c.D.any()) return true;
        int ck = key_of(c.rep, c.D, sent_from(c, r0), false);
        return !lookup(ck, !key.O.any()).empty();
    }

    template <class F>
    void free_configs(const Key &key, const LocalSol &sol, const Bits &r0, F &&emit) {
        std::vector<std::pair<size_t, int>> inst;  // (atom index, state)
        Pairs base;                                // every child
        std::vector<Down> ex;                      // all-but-n with n >= 1
        for (size_t i = 0; i < sol.down.size(); ++i) {
            const Down &d = sol.down[i];
            if (!d.all)
                for (int j = 0; j < d.n; ++j) inst.push_back({i, d.q});
            else if (d.n == 0)
                base.push_back({d.owner, d.q});
            else
                ex.push_back(d);
        }
        if (inst.empty()) {
            std::vector<Child> none;
            emit(none);
            return;
        }
        if (ex.size() > 12) throw ResourceLimit("too many counting constraints at one node");
        struct Group {
            uint32_t X;
            std::vector<size_t> members;
        };
        std::vector<Group> groups;
        std::vector<int> used(ex.size(), 0);
        auto make_child = [&](const Group &g) {
            Child c{-1, Bits(n_), base};
            for (size_t m : g.members) c.send.push_back({sol.down[inst[m].first].owner, inst[m].second});
            for (size_t e = 0; e < ex.size(); ++e)
                if (!(g.X >> e & 1u)) c.send.push_back({ex[e].owner, ex[e].q});
            canon(c.send);
            for (auto [o, q] : c.send) c.D.set(q);
            return c;
        };
        std::function<void(size_t)> rec = [&](size_t i) {
            if (i == inst.size()) {
                std::vector<Child> cs;
                for (const Group &g : groups) {
                    cs.push_back(make_child(g));
                    if (g.X && !viable(key, cs.back(), r0)) return;
                }
                emit(cs);
                return;
            }
            groups.push_back({0, {i}});
            if (viable(key, make_child(groups.back()), r0)) rec(i + 1);
            groups.pop_back();
            if (ex.empty()) return;
            for (Group &g : groups) {
                if (!g.X) continue;
                bool clash = false;
                for (size_t m : g.members) clash = clash || inst[m].first == inst[i].first;
                if (clash) continue;
                g.members.push_back(i);
                rec(i + 1);
                g.members.pop_back();
            }
            for (uint32_t X = 1; X < (1u << ex.size()); ++X) {
                bool ok = true;
                for (size_t e = 0; e < ex.size(); ++e)
                    if ((X >> e & 1u) && used[e] >= ex[e].n) ok = false;
                if (!ok) continue;
                for (size_t e = 0; e < ex.size(); ++e) used[e] += X >> e & 1u;
                groups.push_back({X, {i}});
                rec(i + 1);
                groups.pop_back();
                for (size_t e = 0; e < ex.size(); ++e) used[e] -= X >> e & 1u;
            }
        };
        rec(0);
    }

    template <class F>
    void fixed_configs(const Key &key, const LocalSol &sol, const Bits &r0, F &&emit) {
        const auto &kids = tree_->kids[static_cast<size_t>(key.rep)];
        size_t m = kids.size();
        if (m > 24) throw ResourceLimit("too many children in a membership check");
        std::vector<Pairs> send(m);
        std::function<void(size_t)> rec = [&](size_t i) {
            if (i == sol.down.size()) {
                std::vector<Child> cs;
                for (size_t c = 0; c < m; ++c) {
                    Child ch{kids[c], Bits(n_), send[c]};
                    canon(ch.send);
                    for (auto [o, q] : ch.send) ch.D.set(q);
                    if (!viable(key, ch, r0)) return;
                    cs.push_back(std::move(ch));
                }
                emit(cs);
                return;
            }
            const Down &d = sol.down[i];
            // Exactly n children carry q for a diamond; exactly min(n, m) children are exempt for a box.
            size_t pick = d.all ? std::min<size_t>(static_cast<size_t>(d.n), m) : static_cast<size_t>(d.n);
            if (pick > m) return;
            std::vector<size_t> sel;
            std::function<void(size_t)> choose = [&](size_t from) {
                if (sel.size() == pick) {
                    std::vector<char> in(m, 0);
                    for (size_t s : sel) in[s] = 1;
                    for (size_t c = 0; c < m; ++c)
                        if (in[c] != d.all) send[c].push_back({d.owner, d.q});
                    rec(i + 1);
                    for (size_t c = 0; c < m; ++c)
                        if (in[c] != d.all) send[c].pop_back();
                    return;
                }
                for (size_t c = from; c + (pick - sel.size()) <= m; ++c) {
                    sel.push_back(c);
                    choose(c + 1);
                    sel.pop_back();
                }
            };
            choose(0);
        };
        rec(0);
    }

    Pairs detours(const LocalSol &sol, const std::vector<Child> &cs, const std::vector<const Summ *> &ch) const {
        Pairs e = sol.here;
        for (size_t c = 0; c < cs.size(); ++c) {
            if (!ch[c]) continue;
            for (auto [q, d] : cs[c].send) {
                if (acc_[static_cast<size_t>(q)] || acc_[static_cast<size_t>(d)]) continue;
                for (auto it = std::lower_bound(ch[c]->R.begin(), ch[c]->R.end(), std::make_pair(d, -1));
                     it != ch[c]->R.end() && it->first == d; ++it)
                    e.push_back({q, it->second});
            }
        }
        canon(e);
        return e;
    }

    void pick(int k, const Key &key, const LocalSol &sol, const std::vector<Child> &cs, const std::vector<Bits> &o) {
        bool bp = !key.O.any();
        std::vector<int> cid(cs.size(), -1);
        std::vector<int> uniq;
        for (size_t c = 0; c < cs.size(); ++c) {
            if (!cs[c].D.any()) continue;
            cid[c] = key_of(cs[c].rep, cs[c].D, o[c], false);
            if (std::find(uniq.begin(), uniq.end(), cid[c]) == uniq.end()) uniq.push_back(cid[c]);
        }
        std::vector<std::vector<Summ>> opts;
        for (int u : uniq) {
            opts.push_back(lookup(u, bp));
            if (opts.back().empty()) return;
        }
        std::vector<size_t> choice(uniq.size(), 0);
        std::function<void(size_t)> rec = [&](size_t i) {
            if (i < uniq.size()) {
                for (size_t j = 0; j < opts[i].size(); ++j) {
                    choice[i] = j;
                    rec(i + 1);
                }
                return;
            }
            std::vector<const Summ *> ch(cs.size(), nullptr);
            for (size_t c = 0; c < cs.size(); ++c)
                if (cid[c] >= 0) {
                    size_t u = static_cast<size_t>(std::find(uniq.begin(), uniq.end(), cid[c]) - uniq.begin());
                    ch[c] = &opts[u][choice[u]];
                }
            Pairs edges = detours(sol, cs, ch);
            Bits r = reach(o_eff(key), edges);
            std::vector<Bits> o2 = o;
            bool grew = false;
            for (size_t c = 0; c < cs.size(); ++c) {
                Bits s = sent_from(cs[c], r);
                if (!s.subset_of(o2[c])) {
                    o2[c] |= s;
                    grew = true;
                }
            }
            if (grew) {
                pick(k, key, sol, cs, o2);
                return;
            }
            Bits want(n_);
            for (const Summ *s : ch)
                if (s) want |= s->U;
            if (!want.subset_of(sol.S)) {
                // Any node meeting the larger demand is a local solution for the enlarged state set.
                Bits big = sol.S;
                big |= want;
                if (!expanded_.insert(big).second) return;
                std::vector<LocalSol> ext = local_solutions(key.rep, big, key.root);
                for (const LocalSol &s : ext) solve(k, key, s);
                return;
            }
            finish(k, key, sol, cs, cid, ch, edges);
        };
        rec(0);
    }

    void finish(int k, const Key &key, const LocalSol &sol, const std::vector<Child> &cs, const std::vector<int> &cid,
                const std::vector<const Summ *> &ch, const Pairs &edges) {
        // Cycles among non-accepting states at this node, possibly through subtrees, are rejecting.
        std::vector<int> color(n_, 0);
        bool cyc = false;
        std::function<void(int)> dfs = [&](int q) {
            color[static_cast<size_t>(q)] = 1;
            for (auto it = std::lower_bound(edges.begin(), edges.end(), std::make_pair(q, -1));
                 !cyc && it != edges.end() && it->first == q; ++it) {
                int w = it->second;
                if (color[static_cast<size_t>(w)] == 1) cyc = true;
                else if (color[static_cast<size_t>(w)] == 0) dfs(w);
            }
            color[static_cast<size_t>(q)] = 2;
        };
        for (auto [q, w] : edges)
            if (!cyc && color[static_cast<size_t>(q)] == 0) dfs(q);
        if (cyc) return;
        Summ s{Bits(n_), {}};
        for (auto [q, u] : sol.up) s.U.set(u);
        key.D.each([&](int d) {
            if (acc_[static_cast<size_t>(d)]) return;
            Bits one(n_);
            one.set(d);
            Bits r = reach(one, edges);
            for (auto [q, u] : sol.up)
                if (!acc_[static_cast<size_t>(q)] && !acc_[static_cast<size_t>(u)] && r.test(q)) s.R.push_back({d, u});
        });
        canon(s.R);
        Just j;
        j.label = sol.val & sol.known;
        for (size_t c = 0; c < cs.size(); ++c)
            if (cid[c] >= 0) j.kids.push_back({cid[c], *ch[c]});
        if (add_entry(k, std::move(s), std::move(j)))
            for (int d : deps_[static_cast<size_t>(k)]) push(d);
    }

    RegularTreeRep extract(int root) {
        RegularTreeRep t;
        std::map<std::pair<int, size_t>, int> node_of;
        std::function<int(int, const Summ &)> build = [&](int k, const Summ &s) -> int {
            const auto &es = Y_[static_cast<size_t>(k)];
            size_t idx = 0;
            while (idx < es.size() && !(es[idx].s == s)) ++idx;
            if (idx == es.size()) throw std::logic_error("emptiness certificate lost a justification");
            auto key = std::make_pair(k, idx);
            auto it = node_of.find(key);
            if (it != node_of.end()) return it->second;
            int v = t.add(es[idx].j.label);
            node_of[key] = v;
            for (const auto &[ck, cs] : es[idx].j.kids) {
                int c = build(ck, cs);
                t.kids[static_cast<size_t>(v)].push_back(c);
            }
            return v;
        };
        t.root = build(root, Z_[static_cast<size_t>(root)].front());
        return t;
    }
};

}  // namespace

EmptinessResult is_empty(const TwoWayAutomaton &a, const EmptinessLimits &lim) {
    EmptinessResult r = Engine(a, nullptr, lim).run();
    if (r.certificate && !run_on_regular_tree(a, *r.certificate))
        throw std::logic_error("emptiness certificate rejected by the automaton");
    return r;
}

bool run_on_regular_tree(const TwoWayAutomaton &a, const RegularTreeRep &t) {
    if (t.labels.empty()) return false;
    EmptinessLimits lim;
    lim.max_keys = 2000000;
    return !Engine(a, &t, lim).run().empty;
}

}  // namespace hornce
