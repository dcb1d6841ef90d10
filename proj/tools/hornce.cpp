#include <sys/resource.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hornce/entailment.hpp"
#include "hornce/models.hpp"

using namespace hornce;

namespace {

constexpr int kEntails = 0;
constexpr int kRefuted = 1;
constexpr int kPrecheck = 2;
constexpr int kError = 10;

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string slurp(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Signature read_sig(const std::string &path) { return path.empty() ? Signature{} : parse_signature(slurp(path)); }

double env_number(const char *name, double fallback) {
    const char *v = std::getenv(name);
    if (!v || !*v) return fallback;
    try {
        return std::stod(v);
    } catch (const std::exception &) {
        throw InputError(std::string("bad value for ") + name);
    }
}

void limit_memory(double mib) {
    if (mib <= 0) return;
    rlimit rl{};
    rl.rlim_cur = rl.rlim_max = static_cast<rlim_t>(mib * 1024 * 1024);
    setrlimit(RLIMIT_AS, &rl);
}

bool verify(const Problem &p, const Witness &w) {
    NormalTBox n1 = normalize(p.t1), n2 = normalize(p.t2);
    Reasoner r1(n1), r2(n2);
    if (w.query.atoms.empty()) return r1.abox_consistent(w.abox) && !r2.abox_consistent(w.abox);
    return replay(r1, r2, w);
}

std::string human(const Verdict &v) {
    std::string out = v.entails ? "entails" : "does not entail";
    if (!v.ri) out += " (role inclusion precheck failed)";
    else if (!v.profile) out += " (profile: " + v.profile_msg + ")";
    else if (!v.reason.empty()) out += " (" + v.reason + ")";
    out += "\n";
    if (v.witness) out += "witness: " + witness_json(*v.witness) + "\n";
    return out;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Horn description logic entailment checker"};
    app.require_subcommand(1);

    std::string mode = "cq", base = "cq", t1, t2, sa, sq, tbox, abox;
    bool json = false, certificate = false, verify_witness = false, one_tree = false;
    size_t max_abox = 2, max_cq = 2, depth = 2, max_keys = 200000, probe = 2;
    double seconds = -1, memory = -1;

    auto inputs = [&](CLI::App *c) {
        c->add_option("--t1", t1, "first TBox file")->required();
        c->add_option("--t2", t2, "second TBox file")->required();
        c->add_option("--sigma-a", sa, "ABox signature file");
        c->add_option("--sigma-q", sq, "query signature file");
    };
    auto limits = [&](CLI::App *c) {
        c->add_option("--time-limit", seconds, "seconds, 0 for none (default HORNCE_TIME_LIMIT or 60)");
        c->add_option("--memory-limit", memory, "MiB, 0 for none (default HORNCE_MEMORY_MB or 2048)");
    };

    CLI::App *check = app.add_subcommand("check", "decide an entailment problem");
    inputs(check);
    limits(check);
    check->add_option("--mode", mode, "cq, 1tcq, deductive, cq-incons, conservative or inseparable");
    check->add_option("--base", base, "entailment notion for conservative and inseparable");
    check->add_flag("--json", json, "JSON report on stdout");
    check->add_flag("--certificate", certificate, "include the regular-tree certificate in JSON");
    check->add_flag("--verify-witness", verify_witness, "replay any reported witness");
    check->add_option("--max-keys", max_keys, "emptiness key budget");
    check->add_option("--probe", probe, "individuals in probed candidate ABoxes, 0 to disable");

    CLI::App *orc = app.add_subcommand("oracle", "bounded witness search");
    inputs(orc);
    orc->add_option("--max-abox", max_abox, "individuals per ABox")->check(CLI::PositiveNumber);
    orc->add_option("--max-cq", max_cq, "variables per query")->check(CLI::PositiveNumber);
    orc->add_flag("--1tcq", one_tree, "tree-shaped queries with one answer variable only");

    CLI::App *mat = app.add_subcommand("materialize", "finite prefix of the universal model");
    mat->add_option("--tbox", tbox, "TBox file")->required();
    mat->add_option("--abox", abox, "ABox file")->required();
    mat->add_option("--depth", depth, "anonymous depth");
    mat->add_flag("--json", json, "JSON adjacency dump");

    bool sim = false;
    CLI::App *aut = app.add_subcommand("automaton", "print the intersection automaton");
    inputs(aut);
    aut->add_flag("--sim", sim, "simulation variant of the last component");
    aut->add_flag("--dump", "textual dump (default)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kError;
    }

    try {
        if (seconds < 0) seconds = env_number("HORNCE_TIME_LIMIT", 60);
        if (memory < 0) memory = env_number("HORNCE_MEMORY_MB", 2048);
        limit_memory(memory);

        if (check->parsed()) {
            Problem p;
            auto m = parse_mode(mode), b = parse_mode(base);
            if (!m) throw InputError("unknown mode " + mode);
            if (!b) throw InputError("unknown base mode " + base);
            p.mode = *m;
            p.base = *b;
            p.t1 = parse_tbox(slurp(t1));
            p.t2 = parse_tbox(slurp(t2));
            p.sa = read_sig(sa);
            p.sq = read_sig(sq);
            Options o;
            o.limits.seconds = seconds;
            o.limits.max_keys = max_keys;
            o.probe_individuals = probe;
            Verdict v;
            try {
                v = decide(p, o);
            } catch (const PreconditionError &e) {
                std::cerr << "precondition: " << e.what() << "\n";
                return kPrecheck;
            }
            if (verify_witness && v.witness && !verify(p, *v.witness)) {
                std::cerr << "witness does not replay\n";
                return kError;
            }
            std::cout << (json ? verdict_json(v, p.mode, certificate) + "\n" : human(v));
            if (v.precheck_failed()) return kPrecheck;
            return v.entails ? kEntails : kRefuted;
        }
        if (orc->parsed()) {
            Reasoner r1(normalize(parse_tbox(slurp(t1)))), r2(normalize(parse_tbox(slurp(t2))));
            auto w = oracle_witness_search(r1, r2, read_sig(sa), read_sig(sq), max_abox, max_cq, one_tree);
            std::cout << (w ? witness_json(*w) : std::string("null")) << "\n";
            return w ? kRefuted : kEntails;
        }
        if (mat->parsed()) {
            Reasoner r(normalize(parse_tbox(slurp(tbox))));
            Interpretation I = materialize(r, parse_abox(slurp(abox)), depth);
            std::cout << (json ? I.to_json() + "\n" : I.to_abox());
            return kEntails;
        }
        if (aut->parsed()) {
            Reasoner r1(normalize(parse_tbox(slurp(t1)))), r2(normalize(parse_tbox(slurp(t2))));
            AutomataContext c = make_context(r1, r2, read_sig(sa), read_sig(sq));
            TwoWayAutomaton a =
                intersect({build_A1(c), build_A2(c), build_A3(c), sim ? build_A4_sim(c) : build_A4(c)});
            std::cout << dump(a);
            return kEntails;
        }
    } catch (const std::bad_alloc &) {
        std::cerr << "error: out of memory\n";
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return kError;
}
