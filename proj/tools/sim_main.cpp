#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "molsync/sim/simulator.hpp"

int main(int argc, char** argv) {
  using namespace molsync::sim;

  CLI::App app{"molsync sim: deterministic in-process run of a scenario over simulated links"};
  std::string scenario_path;
  std::size_t star = 0;
  std::string profile_text;
  std::vector<std::string> sweep_texts;
  std::string out_path;
  std::string format = "json";
  std::uint64_t max_events = SimOptions{}.max_events;
  std::string transcripts_dir;

  app.add_option("--scenario", scenario_path, "Scenario file")->check(CLI::ExistingFile);
  app.add_option("--star", star, "Built-in star: master hub plus N spokes, no actions");
  app.add_option("--profile", profile_text, "lat=..,jit=..,loss=..,seed=..[,reorder=1][,uniform_loss=1]");
  app.add_option("--sweep", sweep_texts, "Extra profile per cell, overriding --profile keys (repeatable)");
  app.add_option("--out", out_path, "Write the report here instead of stdout");
  app.add_option("--format", format, "json, or table for a one-line-per-profile summary")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();
  app.add_option("--transcripts", transcripts_dir, "Write <peer>.jsonl transcripts here (single run only)")
      ->check(CLI::ExistingDirectory);
  app.add_option("--max-events", max_events, "Event budget")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  Scenario scenario;
  if (!scenario_path.empty()) {
    auto loaded = load_scenario(scenario_path);
    if (!loaded) {
      std::cerr << scenario_path << ":" << loaded.error().line << ": " << loaded.error().message << '\n';
      return 2;
    }
    scenario = std::move(loaded).value();
  } else if (star > 0) {
    scenario = star_scenario(star);
  } else {
    std::cerr << "need --scenario or --star\n";
    return 2;
  }

  auto base = NetProfile::parse(profile_text);
  if (!base) {
    std::cerr << "bad --profile: " << base.error() << '\n';
    return 2;
  }
  SimOptions options;
  options.max_events = max_events;

  std::string output;
  if (sweep_texts.empty()) {
    Simulation sim(scenario, base.value(), options);
    auto report = sim.run();
    if (!transcripts_dir.empty()) {
      for (std::size_t i = 0; i < sim.peer_count(); ++i) {
        std::ofstream out(std::filesystem::path(transcripts_dir) / (scenario.peers[i].name + ".jsonl"));
        sim.transcript(i).write_jsonl(out);
      }
    }
    if (!report) {
      std::cerr << "simulation failed: " << report.error().message << '\n';
      for (const auto& line : report.error().undelivered) std::cerr << "  undelivered: " << line << '\n';
      return 1;
    }
    if (format == "table") {
      const SweepRow row{base.value(), report.value(), std::nullopt};
      output = sweep_table(std::span(&row, 1));
    } else {
      output = report_json(report.value());
    }
  } else {
    std::vector<NetProfile> profiles;
    for (const auto& text : sweep_texts) {
      auto p = NetProfile::parse(text, base.value());
      if (!p) {
        std::cerr << "bad --sweep '" << text << "': " << p.error() << '\n';
        return 2;
      }
      profiles.push_back(p.value());
    }
    auto rows = sweep(profiles, scenario, options);
    if (!rows) {
      std::cerr << rows.error().message << '\n';
      return 1;
    }
    output = format == "table" ? sweep_table(rows.value()) : sweep_json(rows.value());
  }

  if (out_path.empty()) {
    std::cout << output;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    out << output;
    if (!out) {
      std::cerr << "cannot write " << out_path << '\n';
      return 1;
    }
  }
  return EXIT_SUCCESS;
}
