// strobe: command-line scenario runner.
//
//   strobe fidelity-scan --config run.ini --h_z 0.05
//   strobe describe > defaults.ini
//
// Exit codes: 0 all assertions passed, 1 an assertion failed, 2 bad
// configuration, 3 runtime error.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "strobe/harness.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::vector<std::string> sets;
  std::map<std::string, std::string> fields;
};

void add_config_options(CLI::App* sub, Overrides& o) {
  sub->add_option("-c,--config", o.config_path, "INI file with scenario settings")->check(CLI::ExistingFile);
  sub->add_option("--set", o.sets, "section.key=value, applied after the file");
  for (const auto& f : strobe::config_fields()) {
    const auto key = f.name.substr(f.name.find('.') + 1);
    if (key == "kind") continue;
    sub->add_option("--" + key, o.fields[f.name], f.help)->default_str("");
  }
}

// Collects override problems and validation problems in one ConfigError.
strobe::ScenarioConfig load(const Overrides& o, std::optional<strobe::ScenarioKind> kind = {}) {
  auto cfg = o.config_path.empty() ? strobe::ScenarioConfig{}
                                   : strobe::ScenarioConfig::from_ini_file(o.config_path);
  std::vector<std::string> problems;
  auto apply = [&](const std::string& name, const std::string& value) {
    try {
      cfg.set(name, value);
    } catch (const strobe::ConfigError& e) {
      problems.insert(problems.end(), e.problems().begin(), e.problems().end());
    }
  };
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      problems.push_back("--set expects section.key=value, got '" + s + "'");
      continue;
    }
    apply(s.substr(0, eq), s.substr(eq + 1));
  }
  for (const auto& f : strobe::config_fields()) {
    const auto it = o.fields.find(f.name);
    if (it != o.fields.end() && !it->second.empty()) apply(f.name, it->second);
  }
  if (kind) cfg.kind = *kind;
  for (const auto& p : cfg.problems()) problems.push_back(p);
  if (!problems.empty()) throw strobe::ConfigError(problems);
  return cfg;
}

void print_problems(const strobe::ConfigError& e) {
  std::cerr << "invalid configuration\n";
  for (const auto& p : e.problems()) std::cerr << "  " << p << "\n";
}

int run_scenario(strobe::ScenarioKind kind, const Overrides& o) {
  strobe::ScenarioConfig cfg;
  try {
    cfg = load(o, kind);
  } catch (const strobe::ConfigError& e) {
    print_problems(e);
    return 2;
  }
  try {
    const auto rec = strobe::run(cfg);
    for (const auto& a : rec.assertions) {
      std::cout << (a.passed ? "PASS " : "FAIL ") << a.name << ": " << a.detail << "\n";
    }
    for (const auto& p : rec.outputs) std::cout << "wrote " << p.string() << "\n";
    std::printf("%s finished in %.2f s, config %016llx\n", rec.scenario.c_str(), rec.wall_time,
                static_cast<unsigned long long>(rec.config_hash));
    return rec.passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stroboscopic toric-code simulations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", strobe::library_version());

  const std::vector<std::pair<std::string, strobe::ScenarioKind>> scenarios = {
      {"sequence-scan", strobe::ScenarioKind::SequenceScan},
      {"spectrum", strobe::ScenarioKind::Spectrum},
      {"fidelity-scan", strobe::ScenarioKind::FidelityScan},
      {"thermalize", strobe::ScenarioKind::Thermalize},
      {"cool", strobe::ScenarioKind::Cool},
      {"pump", strobe::ScenarioKind::Pump},
      {"eliminate", strobe::ScenarioKind::Eliminate},
      {"entropy", strobe::ScenarioKind::Entropy},
  };
  std::map<std::string, Overrides> overrides;
  int status = 0;
  for (const auto& [name, kind] : scenarios) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " scenario");
    add_config_options(sub, overrides[name]);
    sub->callback([&, name = name, kind = kind] { status = run_scenario(kind, overrides[name]); });
  }

  auto* describe = app.add_subcommand("describe", "print every field with its default as INI");
  describe->callback([] {
    const strobe::ScenarioConfig defaults;
    std::cout << "; " << strobe::kOmegaDefinition << "\n";
    for (const auto& f : strobe::config_fields()) {
      std::cout << "; " << f.name << ": " << f.help << "\n";
    }
    std::cout << "\n" << defaults.to_ini();
  });

  auto* validate = app.add_subcommand("validate", "check a configuration without running it");
  add_config_options(validate, overrides["validate"]);
  validate->callback([&] {
    try {
      const auto cfg = load(overrides["validate"]);
      std::printf("valid %s configuration, hash %016llx\n", strobe::to_string(cfg.kind),
                  static_cast<unsigned long long>(cfg.hash()));
    } catch (const strobe::ConfigError& e) {
      print_problems(e);
      status = 2;
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  return status;
}
