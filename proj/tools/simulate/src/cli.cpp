#include "ddsim/cli.hpp"

#include <CLI11.hpp>

#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

#include "ddsim/config.hpp"
#include "ddsim/output.hpp"
#include "ddsim/transient.hpp"
#include "ddsim/verify/verify.hpp"

namespace ddsim::cli {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

void report_config_error(const ConfigError& e, std::ostream& err) {
  for (const auto& line : e.errors()) err << "error: " << line << "\n";
}

std::string snapshot_name(int step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fields_%06d.csv", step);
  return buf;
}

// Quotes a free-text CSV field.
std::string quoted(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

int cmd_run(const RunOptions& options, std::ostream& log, std::ostream& err) {
  SimulationConfig config;
  try {
    config = parse_config(read_file(options.deck));
  } catch (const ConfigError& e) {
    report_config_error(e, err);
    return kFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }

  std::filesystem::create_directories(options.out_dir);
  const auto out = [&](const std::string& name) { return options.out_dir / name; };

  std::optional<Simulation> sim;
  try {
    sim.emplace(make_simulation(config));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  write_file(out("config.normalized.yaml"), dump_config(config));

  TimeSeriesTable table(*sim);
  std::optional<CarrierState> last;
  int step = 0;
  auto observer = [&](const StepEvent& ev) {
    table.record(ev);
    last = ev.state;
    if (ev.record) ++step;
    if (config.output.snapshot_every > 0 && step % config.output.snapshot_every == 0) {
      std::ofstream f(out(snapshot_name(step)));
      write_fields(f, *sim, ev.state);
    }
  };

  int code = kComplete;
  RunResult result;
  try {
    result = run(*sim, initial_state(*sim, config), config.stepper, observer, false);
    if (result.status == RunStatus::BlowUp) code = kBlowUp;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    code = kFailure;
  }

  {
    std::ofstream f(out("timeseries.csv"));
    table.write(f);
  }
  if (last) {
    std::ofstream f(out("fields_final.csv"));
    write_fields(f, *sim, *last);
  }
  if (code == kBlowUp) {
    std::ofstream f(out("blowup_report.txt"));
    write_blowup_report(f, result.blowup);
    log << "blow-up (" << result.blowup.reason << ") at t = " << format_number(result.blowup.t_star)
        << "\n";
  } else if (code == kComplete) {
    log << "completed: " << result.accepted << " steps, " << result.rejected << " rejected, "
        << result.gummel_iterations << " gummel iterations\n";
  }
  return code;
}

namespace {

struct SweepRow {
  std::vector<double> currents;
  double wall = 0.0;
  int steps = 0;
  int iterations = 0;
  std::string status = "failed";
  std::string error;
};

SweepRow sweep_point(const std::string& text, const std::string& param, double value,
                     std::size_t contacts) {
  SweepRow row;
  row.currents.assign(contacts, std::numeric_limits<double>::quiet_NaN());
  const auto start = std::chrono::steady_clock::now();
  try {
    const auto config = parse_config(set_config_value(text, param, value));
    const Simulation sim = make_simulation(config);
    std::array<std::vector<double>, 2> flux;
    bool have_flux = false;
    CarrierState final_state;
    const auto result = run(
        sim, initial_state(sim, config), config.stepper,
        [&](const StepEvent& ev) {
          final_state = ev.state;
          if (ev.record) {
            flux = ev.record->face_flux;
            have_flux = true;
          }
        },
        false);
    if (!have_flux) flux = compute_currents(sim, final_state).flux;
    for (std::size_t c = 0; c < contacts; ++c)
      row.currents[c] = terminal_current(sim, flux, static_cast<int>(c));
    row.steps = result.accepted;
    row.iterations = result.gummel_iterations;
    row.status = result.status == RunStatus::Completed ? "completed" : "blowup";
  } catch (const ConfigError& e) {
    row.error = e.errors().empty() ? e.what() : e.errors().front();
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  row.wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

}  // namespace

int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err) {
  std::string text;
  SimulationConfig base;
  try {
    text = read_file(options.deck);
    base = parse_config(text);
    // Resolve the path once up front so a typo fails the sweep, not every row.
    const std::string probe = set_config_value(text, options.param, 0.0);
    // A missing leaf is inserted; reject it here if the deck grammar does not know it.
    try {
      parse_config(probe);
    } catch (const ConfigError& e) {
      for (const auto& m : e.errors())
        if (m.find("unknown key") != std::string::npos) throw ConfigError({m});
    }
  } catch (const ConfigError& e) {
    report_config_error(e, err);
    return kFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }

  const auto& contacts = base.device.boundary.contacts;
  std::vector<SweepRow> rows(options.values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++)
      rows[i] = sweep_point(text, options.param, options.values[i], contacts.size());
  };
  const int workers =
      std::max(1, std::min<int>(options.workers, static_cast<int>(options.values.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ofstream file;
  if (!options.output.empty()) {
    file.open(options.output);
    if (!file) {
      err << "error: cannot write '" << options.output.string() << "'\n";
      return kFailure;
    }
  }
  std::ostream& sink = options.output.empty() ? out : file;
  std::vector<std::string> header{"value"};
  for (const auto& c : contacts) header.push_back("I_" + c.name);
  for (const char* h : {"wall_time", "steps", "gummel_iterations", "status", "error"})
    header.push_back(h);
  write_csv_row(sink, header);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::vector<std::string> fields{format_number(options.values[i])};
    for (double c : r.currents) fields.push_back(format_number(c));
    fields.push_back(format_number(r.wall));
    fields.push_back(std::to_string(r.steps));
    fields.push_back(std::to_string(r.iterations));
    fields.push_back(r.status);
    fields.push_back(quoted(r.error));
    write_csv_row(sink, fields);
    if (r.status == "failed") {
      err << "point " << format_number(options.values[i]) << " failed: " << r.error << "\n";
    }
  }
  return kComplete;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, std::ostream& out,
               std::ostream& err) {
  if (suite != "all" && !verify::find_suite(suite)) {
    err << "error: unknown suite '" << suite << "'; available: all";
    for (const auto& s : verify::suites()) err << ", " << s.name;
    err << "\n";
    return kUsage;
  }
  const auto checks = verify::run_suite(suite, seed);
  verify::write_checks(out, checks);
  int failed = 0;
  for (const auto& c : checks) failed += !c.pass();
  err << checks.size() << " checks, " << failed << " failed\n";
  return failed == 0 && !checks.empty() ? kComplete : kFailure;
}

int worker_count_from_env() {
  if (const char* env = std::getenv("SIMULATE_WORKERS")) {
    int n = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec == std::errc() && ptr == s.data() + s.size() && n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<double> parse_value_list(std::string_view text) {
  std::vector<double> out;
  if (text.find_first_not_of(" \t") == std::string_view::npos) return out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t comma = text.find(',', pos);
    std::string_view item = text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size())
      throw std::invalid_argument("bad value '" + std::string(item) + "' in --values");
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Transient drift-diffusion simulator"};
  app.require_subcommand(1);

  RunOptions run_opts;
  auto* run_cmd = app.add_subcommand("run", "Integrate a deck in time");
  run_cmd->add_option("deck", run_opts.deck, "Deck file")->required();
  run_cmd->add_option("--out", run_opts.out_dir, "Output directory")
      ->capture_default_str();

  SweepOptions sweep_opts;
  std::string values;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a deck once per parameter value");
  sweep_cmd->add_option("deck", sweep_opts.deck, "Deck file")->required();
  sweep_cmd->add_option("--param", sweep_opts.param, "Dotted path of a scalar deck entry")
      ->required();
  sweep_cmd->add_option("--values", values, "Comma-separated values")->required();
  sweep_cmd->add_option("--out", sweep_opts.output, "CSV file (default: standard output)");

  std::string suite;
  std::uint64_t seed = 0;
  auto* verify_cmd = app.add_subcommand("verify", "Run a property suite");
  verify_cmd->add_option("suite", suite, "Suite name or 'all'")->required();
  verify_cmd->add_option("--seed", seed, "Random seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kComplete : kUsage;
  }

  if (*run_cmd) return cmd_run(run_opts, out, err);
  if (*sweep_cmd) {
    try {
      sweep_opts.values = parse_value_list(values);
    } catch (const std::invalid_argument& e) {
      err << "error: " << e.what() << "\n";
      return kUsage;
    }
    sweep_opts.workers = worker_count_from_env();
    return cmd_sweep(sweep_opts, out, err);
  }
  return cmd_verify(suite, seed, out, err);
}

}  // namespace ddsim::cli
