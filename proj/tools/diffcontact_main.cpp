#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "diffcontact/cli.hpp"

namespace {

// Config file: plain key=value lines, '#' starts a comment. CLI --set flags
// are appended afterwards so they override the file.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw diffcontact::UsageError("cannot read config file " + path);
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  while (std::getline(in, line)) {
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    std::size_t e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw diffcontact::UsageError("config line is not key=value: '" + line + "'");
    }
    kv.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return kv;
}

std::vector<std::pair<std::string, std::string>> split_sets(const std::vector<std::string>& sets) {
  std::vector<std::pair<std::string, std::string>> kv;
  for (const std::string& s : sets) {
    std::size_t eq = s.find('=');
    if (eq == std::string::npos) {
      throw diffcontact::UsageError("--set expects key=value, got '" + s + "'");
    }
    kv.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return kv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diffcontact: differentiable 2D contact simulation benchmarks"};
  app.require_subcommand(1);

  std::string task = "task1";
  std::string models = "all";
  std::string out_dir = "out";
  std::string config_file;
  std::vector<std::string> sets;
  bool check = false;
  int jobs = 0;

  auto add_common = [&](CLI::App* sub, bool with_models) {
    sub->add_option("--task", task, "task1 | task2 | task2-friction | task3");
    if (with_models) {
      sub->add_option("--models", models, "comma list of models, or 'all', or '' for none");
    }
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--config", config_file, "key=value config file");
    sub->add_option("--set", sets, "override, e.g. --set k_n=1000")->take_all();
    sub->add_option("--jobs", jobs, "worker pool size (0 = auto)");
    sub->add_flag("--check", check, "exit 1 when gradients fall outside tolerance");
  };

  CLI::App* grads = app.add_subcommand("grads", "gradient tables at iteration 0");
  CLI::App* optimize = app.add_subcommand("optimize", "gradient-descent runs and curves");
  CLI::App* sweep = app.add_subcommand("sweep-stiffness", "compliant k_n sweep on task3");
  add_common(grads, true);
  add_common(optimize, true);
  add_common(sweep, false);

  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<std::pair<std::string, std::string>> kv;
    if (!config_file.empty()) kv = read_config_file(config_file);
    std::vector<std::pair<std::string, std::string>> cli_kv = split_sets(sets);
    kv.insert(kv.end(), cli_kv.begin(), cli_kv.end());

    diffcontact::RunConfig cfg;
    cfg.task = task;
    cfg.models = models;
    cfg.out_dir = out_dir;
    cfg.overrides = diffcontact::Overrides::parse(kv);
    cfg.check = check;
    cfg.jobs = jobs;
    if (sweep->parsed()) cfg.task = "task3";

    if (grads->parsed()) return diffcontact::cmd_grads(cfg);
    if (optimize->parsed()) return diffcontact::cmd_optimize(cfg);
    return diffcontact::cmd_sweep_stiffness(cfg);
  } catch (const diffcontact::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
