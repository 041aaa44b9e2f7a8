// hunfold <command> [--config path] [--out dir] [--threads N] [--set section.key=value]...
// exit 0: all checks pass; 1: a check failed or a solver did not converge;
// 2: usage, config parse or validation error; 3: i/o or internal error.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hunfold/hunfold.h"

namespace {

int exit_for(hf_status s) {
  switch (s) {
    case HF_OK: return 0;
    case HF_E_NUMERICAL: return 1;
    case HF_E_CONFIG:
    case HF_E_INVALID_ARGUMENT: return 2;
    default: return 3;
  }
}

int report_error(hf_status s) {
  std::fprintf(stderr, "hunfold: %s: %s\n", hf_status_name(s), hf_last_error());
  return exit_for(s);
}

struct ConfigGuard {
  hf_config* p = nullptr;
  ~ConfigGuard() { hf_config_free(p); }
};

struct ReportGuard {
  hf_report* p = nullptr;
  ~ReportGuard() { hf_report_free(p); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic unfolding and homogenization on the Heisenberg group"};
  app.set_version_flag("--version", hf_version());
  std::string command, config_path, out_dir;
  int threads = 0;
  bool print_config = false, quiet = false;
  std::vector<std::string> sets;
  app.add_option("command", command, "verify | unfold-demo | cell | homogenize | converge | control")
      ->required()
      ->check(CLI::IsMember({"verify", "unfold-demo", "cell", "homogenize", "converge", "control"}));
  app.add_option("--config,-c", config_path, "config file ([section] key = value)");
  app.add_option("--out,-o", out_dir, "output directory (default: output.dir of the config)");
  app.add_option("--threads,-t", threads, "worker threads (default: THREADS env, else 1)")->check(CLI::PositiveNumber);
  app.add_option("--set,-s", sets, "override one key, section.key=value");
  app.add_flag("--print-config", print_config, "print the effective config and exit");
  app.add_flag("--quiet,-q", quiet, "only the summary line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (threads > 0)
    if (auto s = hf_set_threads(threads); s != HF_OK) return report_error(s);

  ConfigGuard cfg;
  hf_status s = config_path.empty() ? hf_config_default(command.c_str(), &cfg.p)
                                    : hf_config_load(config_path.c_str(), command.c_str(), &cfg.p);
  if (s != HF_OK) return report_error(s);
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "hunfold: --set expects section.key=value, got '%s'\n", kv.c_str());
      return 2;
    }
    s = hf_config_set(cfg.p, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    if (s != HF_OK) return report_error(s);
  }

  if (print_config) {
    char* text = nullptr;
    if ((s = hf_config_to_ini(cfg.p, &text)) != HF_OK) return report_error(s);
    std::fputs(text, stdout);
    hf_string_free(text);
    return 0;
  }

  if (out_dir.empty()) {
    char* dir = nullptr;
    if ((s = hf_config_output(cfg.p, &dir)) != HF_OK) return report_error(s);
    out_dir = dir;
    hf_string_free(dir);
  }

  ReportGuard rep;
  s = hf_run(cfg.p, out_dir.c_str(), &rep.p);
  if (s != HF_OK && s != HF_E_NUMERICAL) return report_error(s);
  if (s == HF_E_NUMERICAL) std::fprintf(stderr, "hunfold: %s\n", hf_last_error());

  if (!quiet)
    for (std::size_t i = 0; i < hf_report_check_count(rep.p); ++i) {
      const char *name = nullptr, *detail = nullptr;
      int passed = 0, gating = 0;
      hf_report_check(rep.p, i, &name, &passed, &gating, &detail);
      std::printf("%-5s %s%s: %s\n", passed ? "ok" : (gating ? "FAIL" : "note"), name, gating ? "" : " (informational)",
                  detail);
    }
  const bool ok = hf_report_passed(rep.p);
  std::printf("%s %s: %s in %.2f s, results in %s\n", ok ? "PASS" : "FAIL", command.c_str(),
              hf_report_numerical_failure(rep.p) ? "solver failure" : (ok ? "all checks passed" : "checks failed"),
              hf_report_seconds(rep.p), out_dir.c_str());
  return ok ? 0 : 1;
}
