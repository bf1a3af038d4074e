// apm: command-line front end for invitation planning on social graphs.
//
//   apm gen             synthetic Zipf-weighted graph -> edge list
//   apm miia            dump the arborescence for (s, t)
//   apm plan            rg | sita | sitina plan, table or JSON
//   apm eval            acceptance probability of a given invitation set
//   apm simulate        Monte-Carlo estimate of the same
//   apm counterexample  non-submodularity report
//   apm bench           sensitivity sweep -> CSV
//
// Exit status: 0 success, 1 usage error, 2 domain error.

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "apm/apm.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kDomainError = 2;

struct GraphArgs {
  std::string graph;
  bool undirected = false;
  apm::NodeId source = 0;
  apm::NodeId target = 0;
  std::string friends;
  double theta = 0.0;
  std::string homophily;
};

void add_graph_flags(CLI::App* cmd, GraphArgs& a) {
  cmd->add_option("--graph", a.graph, "Edge-list file (\"u v w\" per line)")->required();
  cmd->add_flag("--undirected", a.undirected, "Expand each input line into two arcs");
  cmd->add_option("--source", a.source, "Initiator s")->required();
  cmd->add_option("--target", a.target, "Friending target t")->required();
  cmd->add_option("--friends", a.friends, "File of friend ids, one per line (default: out-neighbours of s)");
  cmd->add_option("--theta", a.theta, "Minimum path probability kept in the tree")->capture_default_str();
  cmd->add_option("--homophily", a.homophily, "Constant homophily in [0,1], or a file of \"v h\" lines");
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw apm::DomainError("cannot open " + path);
  return in;
}

struct Loaded {
  apm::SocialGraph graph;
  std::optional<apm::FriendSet> friends;
  std::optional<apm::HomophilyModel> homophily;
};

Loaded load(const GraphArgs& a) {
  Loaded l;
  auto in = open_input(a.graph);
  l.graph = apm::load_edge_list(in, {a.undirected});
  l.graph.require(a.target);
  if (a.friends.empty()) {
    l.friends = apm::FriendSet::out_neighbours(l.graph, a.source);
  } else {
    auto fin = open_input(a.friends);
    l.friends = apm::FriendSet(l.graph, a.source, apm::load_id_list(fin));
  }
  if (!a.homophily.empty()) {
    std::size_t used = 0;
    double h = -1.0;
    try {
      h = std::stod(a.homophily, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == a.homophily.size()) {
      l.homophily = apm::HomophilyModel::constant(h);
    } else {
      auto hin = open_input(a.homophily);
      l.homophily = apm::load_homophily(hin);
    }
  }
  return l;
}

apm::Arborescence tree_for(const Loaded& l, const GraphArgs& a) {
  return apm::build_miia(l.graph, *l.friends, a.target, a.theta, l.homophily);
}

apm::SelectionSet read_selection(const std::string& path) {
  auto in = open_input(path);
  return apm::load_id_list(in);
}

void print_report(std::ostream& out, const apm::Arborescence& tree, const apm::SelectionMask* mask,
                  const apm::ProbabilityReport& rep, bool table) {
  out << std::setprecision(10) << "objective " << rep.objective << '\n';
  if (!table) return;
  out << "node in_R ap\n";
  for (apm::TreeIndex v = 0; v < tree.size(); ++v) {
    const bool in_r = mask ? (*mask)[v] != 0 : !tree.is_friend(v);
    out << tree.label(v) << ' ' << (tree.is_friend(v) ? "S" : (in_r ? "1" : "0")) << ' ' << rep.ap[v] << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Invitation planning for active friending"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic Zipf-weighted graph");
  std::size_t gen_nodes = 1000;
  double gen_degree = 10.0;
  apm::ZipfWeightConfig gen_cfg;
  std::string gen_out, gen_h_out;
  double gen_h_wmax = 0.3;
  gen->add_option("--nodes", gen_nodes, "Node count (>= 2)")->capture_default_str();
  gen->add_option("--avg-degree", gen_degree, "Average out-degree (>= 1)")->capture_default_str();
  gen->add_option("--alpha", gen_cfg.alpha, "Zipf skewness (>= 0)")->capture_default_str();
  gen->add_option("--ranks", gen_cfg.rank_count, "Zipf rank count K")->capture_default_str();
  gen->add_option("--wmax", gen_cfg.w_max, "Largest weight")->capture_default_str();
  gen->add_option("--seed", gen_cfg.seed, "RNG seed")->capture_default_str();
  gen->add_option("--output", gen_out, "Edge-list output file (default: stdout)");
  gen->add_option("--homophily-out", gen_h_out, "Also write per-node Zipf homophily (\"v h\" lines)");
  gen->add_option("--homophily-wmax", gen_h_wmax, "Largest homophily value")->capture_default_str();

  // miia
  auto* miia = app.add_subcommand("miia", "Dump the maximum influence in-arborescence");
  GraphArgs miia_args;
  add_graph_flags(miia, miia_args);

  // plan
  auto* plan = app.add_subcommand("plan", "Compute an invitation plan");
  GraphArgs plan_args;
  std::size_t plan_budget = 1;
  std::string plan_algo = "sitina", plan_format = "table";
  add_graph_flags(plan, plan_args);
  plan->add_option("--budget", plan_budget, "Invitation budget r_R (>= 1)")->required();
  plan->add_option("--algorithm", plan_algo, "rg | sita | sitina")
      ->check(CLI::IsMember({"rg", "sita", "sitina"}))
      ->capture_default_str();
  plan->add_option("--output", plan_format, "table | json")->check(CLI::IsMember({"table", "json"}))->capture_default_str();

  // eval
  auto* eval = app.add_subcommand("eval", "Acceptance probability of an invitation set");
  GraphArgs eval_args;
  std::string eval_select;
  bool eval_table = false;
  add_graph_flags(eval, eval_args);
  eval->add_option("--select", eval_select, "File of invited ids (omit for the all-invited activation probability)");
  eval->add_flag("--table", eval_table, "Print per-node probabilities");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Monte-Carlo estimate of the acceptance probability");
  GraphArgs sim_args;
  std::string sim_select;
  std::uint64_t sim_trials = 100000, sim_seed = 1;
  unsigned sim_workers = 1;
  add_graph_flags(sim, sim_args);
  sim->add_option("--select", sim_select, "File of invited ids")->required();
  sim->add_option("--trials", sim_trials, "Number of trials")->capture_default_str();
  sim->add_option("--seed", sim_seed, "RNG seed")->capture_default_str();
  sim->add_option("--workers", sim_workers, "Worker threads")->capture_default_str();

  // counterexample
  auto* counter = app.add_subcommand("counterexample", "Show that acceptance is not submodular in the invitation set");

  // bench
  auto* bench = app.add_subcommand("bench", "Run a sensitivity sweep and write CSV");
  std::string bench_spec, bench_out, bench_log;
  std::optional<std::uint64_t> bench_seed;
  unsigned bench_threads = std::max(1u, std::thread::hardware_concurrency());
  bench->add_option("--spec", bench_spec, "key=value experiment spec file")->required();
  bench->add_option("--output", bench_out, "CSV output file (default: stdout)");
  bench->add_option("--log", bench_log, "Dropped-sample log file (default: stderr)");
  bench->add_option("--seed", bench_seed, "Override the spec seed");
  bench->add_option("--threads", bench_threads, "Worker threads for sweep points")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageError;
  }

  try {
    if (gen->parsed()) {
      const apm::SocialGraph g = apm::generate_synthetic(gen_nodes, gen_degree, gen_cfg);
      if (gen_out.empty()) {
        apm::write_edge_list(std::cout, g);
      } else {
        std::ofstream out(gen_out);
        apm::write_edge_list(out, g);
      }
      if (!gen_h_out.empty()) {
        apm::ZipfWeightConfig hc = gen_cfg;
        hc.w_max = gen_h_wmax;
        hc.seed = gen_cfg.seed ^ 0x5DEECE66DULL;
        apm::ZipfWeights hw(hc);
        std::mt19937_64 rng(hc.seed);
        std::ofstream out(gen_h_out);
        out << std::setprecision(17);
        for (apm::NodeId id : g.ids()) out << id << ' ' << hw(rng) << '\n';
      }
      return 0;
    }

    if (miia->parsed()) {
      const Loaded l = load(miia_args);
      apm::dump_arborescence(std::cout, tree_for(l, miia_args));
      return 0;
    }

    if (plan->parsed()) {
      const Loaded l = load(plan_args);
      const apm::Algorithm algo = apm::parse_algorithm(plan_algo);
      apm::InvitationPlan result;
      std::size_t tree_size = 0;
      double ms = 0.0;
      if (l.friends->contains(plan_args.target)) {
        const apm::PlanRequest req{*l.friends, plan_args.target, plan_budget, plan_args.theta};
        result = apm::plan(l.graph, req, algo, l.homophily);
      } else {
        const apm::Arborescence tree = tree_for(l, plan_args);
        tree_size = tree.size();
        const auto start = std::chrono::steady_clock::now();
        result = apm::plan_on_tree(tree, plan_budget, algo);
        ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      }
      if (plan_format == "json") {
        nlohmann::json doc;
        doc["algorithm"] = std::string(apm::to_string(result.algorithm));
        doc["budget"] = result.budget;
        doc["objective"] = result.objective;
        doc["selected"] = nlohmann::json::array();
        for (const auto& e : result.entries)
          doc["selected"].push_back({{"node", e.node}, {"subtree_budget", e.subtree_budget}, {"ap", e.ap}});
        doc["tree_size"] = tree_size;
        doc["runtime_ms"] = ms;
        std::cout << doc.dump(2) << '\n';
      } else {
        std::cout << std::setprecision(10);
        if (result.already_friends) std::cout << "target " << plan_args.target << " is already a friend\n";
        std::cout << "algorithm " << apm::to_string(result.algorithm) << '\n'
                  << "budget " << result.budget << '\n'
                  << "objective " << result.objective << '\n'
                  << "tree_size " << tree_size << '\n'
                  << "runtime_ms " << ms << '\n'
                  << "node subtree_budget ap\n";
        for (const auto& e : result.entries) std::cout << e.node << ' ' << e.subtree_budget << ' ' << e.ap << '\n';
      }
      return 0;
    }

    if (eval->parsed()) {
      const Loaded l = load(eval_args);
      const apm::Arborescence tree = tree_for(l, eval_args);
      if (eval_select.empty()) {
        print_report(std::cout, tree, nullptr, apm::activation_probability(tree), eval_table);
      } else {
        const apm::SelectionMask mask = apm::to_mask(tree, read_selection(eval_select));
        print_report(std::cout, tree, &mask, apm::acceptance_probability(tree, mask), eval_table);
      }
      return 0;
    }

    if (sim->parsed()) {
      const Loaded l = load(sim_args);
      const apm::Arborescence tree = tree_for(l, sim_args);
      const apm::SelectionMask mask = apm::to_mask(tree, read_selection(sim_select));
      const apm::McEstimate est = apm::mc_estimate(tree, mask, sim_trials, sim_seed, sim_workers);
      std::cout << std::setprecision(10) << "estimate " << est.estimate << " +- " << est.std_error << " (" << est.trials
                << " trials)\n"
                << "analytic " << apm::acceptance_probability(tree, mask).objective << '\n';
      return 0;
    }

    if (counter->parsed()) {
      const apm::CounterexampleReport r = apm::submodularity_counterexample();
      std::cout << std::setprecision(6) << "S={a}; a->b 0.9, b->t 0.1, b->c 1, c->t 1\n"
                << "ap(R_S={t})        = " << r.ap_small << '\n'
                << "ap(R_S+{c})        = " << r.ap_small_plus << '\n'
                << "ap(R_T={b,t})      = " << r.ap_large << '\n'
                << "ap(R_T+{c})        = " << r.ap_large_plus << '\n'
                << "gain at R_S        = " << r.gain_small << '\n'
                << "gain at R_T        = " << r.gain_large << '\n'
                << "exact live-edge    = " << r.exact_small << ", " << r.exact_small_plus << ", " << r.exact_large
                << ", " << r.exact_large_plus << '\n';
      if (r.submodularity_violated())
        std::cout << "non-submodular: " << r.gain_small << " < " << r.gain_large << '\n';
      return 0;
    }

    if (bench->parsed()) {
      auto in = open_input(bench_spec);
      apm::bench::ExperimentSpec spec = apm::bench::parse_spec(in);
      if (bench_seed) spec.seed = *bench_seed;
      spec.threads = bench_threads;
      std::ofstream log_file;
      std::ostream* log = &std::cerr;
      if (!bench_log.empty()) {
        log_file.open(bench_log);
        log = &log_file;
      }
      const auto rows = apm::bench::run_experiment(spec, log);
      if (bench_out.empty()) {
        apm::bench::write_csv(std::cout, rows);
      } else {
        std::ofstream out(bench_out);
        apm::bench::write_csv(out, rows);
      }
      return 0;
    }
  } catch (const apm::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDomainError;
  } catch (const apm::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDomainError;
  }
  return kUsageError;
}
