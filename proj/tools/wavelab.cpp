#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "nlwave/nlwave.hpp"

namespace fs = std::filesystem;
using namespace nlwave;
using namespace nlwave::runner;

int main(int argc, char** argv) {
  CLI::App app{"wavelab: leapfrog experiments for the 1D semilinear wave equation u_tt - u_xx = -s|u|^{p-1}u"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::vector<std::string> overrides;
  bool quiet = false;
  for (const auto& c : subcommands()) {
    auto* sub = app.add_subcommand(c);
    sub->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--override", overrides, "key=value applied after the config file (repeatable)");
    sub->add_option("--out-dir", out_dir, "directory for CSV/JSON outputs and manifest.json");
    sub->add_flag("--quiet", quiet, "suppress the status line");
  }
  std::string manifest_path;
  auto* rep = app.add_subcommand("replay", "re-run a manifest and compare output digests");
  rep->add_option("manifest", manifest_path, "manifest.json of an earlier run")->required()->check(CLI::ExistingFile);
  rep->add_option("--out-dir", out_dir, "directory for the re-run");
  rep->add_flag("--quiet", quiet, "suppress the status line");

  CLI11_PARSE(app, argc, argv);
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    Outcome res;
    if (cmd == "replay") {
      res = replay(manifest_path, out_dir);
    } else {
      std::string text;
      std::vector<std::pair<std::string, std::string>> inputs;
      if (!config_path.empty()) {
        text = io::read_text(config_path);
        inputs.emplace_back(config_path, io::sha256_hex(text));
      }
      res = execute(cmd, parse_config(text, overrides), out_dir, inputs);
    }
    if (!quiet) std::cout << cmd << ": " << res.status << " (" << out_dir << ")\n";
    return res.exit;
  } catch (const Error& e) {
    const auto j = io::error_json(e.kind(), e.what());
    std::cerr << j.dump() << "\n";
    try {
      io::write_text(fs::path(out_dir) / "error.json", j.dump(2) + "\n");
    } catch (...) {
    }
    return 1;
  } catch (const std::exception& e) {
    std::cerr << io::error_json("InternalError", e.what()).dump() << "\n";
    return 1;
  }
}
