// Copyright 2026 The pnobench Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// pnobench: command-line front end for the experiment harness.
//
//   pnobench run    --problem knapsack_gen --method spo_plus --seed 1 --out dir
//   pnobench grid   --config cfg.json --out dir
//   pnobench sweep  --problem knapsack_gen --axis capacity --values 30,60,90
//   pnobench report --input dir/report.json --format csv --out dir
//
// Results and failures are printed to stdout as one JSON object. Library
// errors exit with status 1, usage errors with status 2.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pno/error.hpp"
#include "pno/harness.hpp"

namespace {

using nlohmann::json;

struct RunFlags {
  std::string config_path;
  std::optional<std::string> problem;
  std::optional<std::string> method;
  std::optional<std::uint64_t> seed;
  std::optional<double> learning_rate;
  std::optional<int> max_epochs;
  std::optional<int> patience;
  std::optional<int> pretrain_epochs;
  std::optional<std::string> data_json;
  std::optional<std::string> external_solver;
  std::string out = "pnobench_out";
  std::string format = "json";
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON RunConfig file");
  cmd->add_option("--problem", f.problem, "Problem or data source name");
  cmd->add_option("--method", f.method, "Training method");
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--lr", f.learning_rate, "Learning rate for a single run");
  cmd->add_option("--epochs", f.max_epochs, "Maximum epochs");
  cmd->add_option("--patience", f.patience, "Early-stopping patience");
  cmd->add_option("--pretrain", f.pretrain_epochs, "Prediction-loss epochs first");
  cmd->add_option("--data", f.data_json, "JSON object merged into config.data");
  cmd->add_option("--external-solver", f.external_solver,
                  "Command of an external solver process");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--format", f.format, "Report format: json or csv");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pno::IoError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw pno::ParseError("'" + path + "': " + e.what());
  }
}

pno::RunConfig resolve_config(const RunFlags& f) {
  json j = f.config_path.empty() ? json::object() : read_json_file(f.config_path);
  if (!j.is_object()) throw pno::ConfigError("run config must be a JSON object");
  if (f.problem) j["problem"] = *f.problem;
  if (f.method) {
    if (!j.contains("loss")) j["loss"] = json::object();
    j["loss"]["method"] = *f.method;
    j.erase("method");
  }
  if (f.seed) j["seed"] = *f.seed;
  if (f.learning_rate) j["learning_rate"] = *f.learning_rate;
  if (f.max_epochs) j["max_epochs"] = *f.max_epochs;
  if (f.patience) j["patience"] = *f.patience;
  if (f.pretrain_epochs) j["pretrain_epochs"] = *f.pretrain_epochs;
  if (f.external_solver) j["external_solver"] = *f.external_solver;
  if (f.data_json) {
    json extra;
    try {
      extra = json::parse(*f.data_json);
    } catch (const json::exception& e) {
      throw pno::ParseError(std::string("--data: ") + e.what());
    }
    if (!extra.is_object()) throw pno::ConfigError("--data must be a JSON object");
    if (!j.contains("data")) j["data"] = json::object();
    j["data"].update(extra);
  }
  pno::RunConfig c = pno::RunConfig::from_json(j);
  c.validate();
  return c;
}

void write_json(const std::string& dir, const std::string& name, const json& j) {
  const std::string path = dir + "/" + name;
  std::ofstream out(path);
  if (!out) throw pno::IoError("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

json brief(const pno::RunReport& r) {
  json j = r.to_json();
  j.erase("epochs");
  j.erase("model");
  return j;
}

std::vector<pno::RunReport> reports_from(const json& j) {
  std::vector<pno::RunReport> out;
  if (j.is_array()) {
    for (const json& e : j) {
      auto more = reports_from(e);
      out.insert(out.end(), more.begin(), more.end());
    }
  } else if (j.is_object() && j.contains("runs")) {
    return reports_from(j["runs"]);
  } else {
    out.push_back(pno::RunReport::from_json(j));
  }
  return out;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find(',', pos), text.size());
    const std::string item = text.substr(pos, end - pos);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw pno::ConfigError("--values: '" + item + "' is not a number");
    }
    pos = end + 1;
  }
  return out;
}

int print_error(const std::string& kind, const std::string& message, int code) {
  std::cout << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predict-and-optimize benchmark harness", "pnobench"};
  app.require_subcommand(1);

  RunFlags run_flags, grid_flags, sweep_flags;
  CLI::App* run_cmd = app.add_subcommand("run", "Train one configuration");
  add_run_flags(run_cmd, run_flags);
  CLI::App* grid_cmd = app.add_subcommand("grid", "Learning-rate grid search");
  add_run_flags(grid_cmd, grid_flags);
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Sensitivity sweep");
  add_run_flags(sweep_cmd, sweep_flags);
  std::string axis, values;
  sweep_cmd->add_option("--axis", axis,
                        "capacity, variable_size or generalization_capacity")
      ->required();
  sweep_cmd->add_option("--values", values, "Comma-separated axis values")->required();

  CLI::App* report_cmd = app.add_subcommand("report", "Re-emit saved reports");
  std::vector<std::string> inputs;
  std::string report_out = "pnobench_out", report_format = "json";
  report_cmd->add_option("--input", inputs, "Report JSON files")->required();
  report_cmd->add_option("--out", report_out, "Output directory");
  report_cmd->add_option("--format", report_format, "json or csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return print_error("usage", e.what(), 2);
  }

  try {
    if (*run_cmd) {
      const auto format = pno::report_format_from_string(run_flags.format);
      const pno::RunConfig cfg = resolve_config(run_flags);
      const pno::RunReport r = pno::run_training(cfg);
      pno::emit_report({r}, run_flags.out, format);
      write_json(run_flags.out, "report.json", r.to_json());
      std::cout << json{{"status", "ok"}, {"out", run_flags.out}, {"report", brief(r)}}.dump()
                << "\n";
    } else if (*grid_cmd) {
      const auto format = pno::report_format_from_string(grid_flags.format);
      const pno::RunConfig cfg = resolve_config(grid_flags);
      const pno::GridResult g = pno::grid_search(cfg);
      pno::emit_report(g.runs, grid_flags.out, format);
      json table = json::array();
      for (std::size_t k = 0; k < g.runs.size(); ++k) {
        json row = g.runs[k].to_json();
        if (!g.errors[k].empty()) row["error"] = g.errors[k];
        table.push_back(std::move(row));
      }
      write_json(grid_flags.out, "grid.json", {{"best", g.best.to_json()}, {"runs", table}});
      std::cout << json{{"status", "ok"}, {"out", grid_flags.out}, {"best", brief(g.best)}}.dump()
                << "\n";
    } else if (*sweep_cmd) {
      const auto format = pno::report_format_from_string(sweep_flags.format);
      const pno::RunConfig cfg = resolve_config(sweep_flags);
      const auto reports =
          pno::sweep(cfg, pno::sweep_axis_from_string(axis), parse_values(values));
      pno::emit_report(reports, sweep_flags.out, format);
      json all = json::array();
      json briefs = json::array();
      for (const auto& r : reports) {
        all.push_back(r.to_json());
        briefs.push_back(brief(r));
      }
      write_json(sweep_flags.out, "sweep.json", all);
      std::cout << json{{"status", "ok"}, {"out", sweep_flags.out}, {"reports", briefs}}.dump()
                << "\n";
    } else if (*report_cmd) {
      const auto format = pno::report_format_from_string(report_format);
      std::vector<pno::RunReport> reports;
      for (const std::string& path : inputs) {
        auto more = reports_from(read_json_file(path));
        reports.insert(reports.end(), more.begin(), more.end());
      }
      pno::emit_report(reports, report_out, format);
      std::cout << json{{"status", "ok"}, {"out", report_out}, {"reports", reports.size()}}.dump()
                << "\n";
    }
  } catch (const pno::Error& e) {
    return print_error(e.kind(), e.what(), 1);
  } catch (const std::exception& e) {
    return print_error("internal", e.what(), 1);
  }
  return 0;
}
