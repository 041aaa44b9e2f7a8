#include "hunfold/hunfold.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <optional>
#include <string>

#include "hunfold/control.hpp"
#include "hunfold/experiment.hpp"
#include "hunfold/parallel.hpp"

struct hf_config {
  hunfold::ExperimentConfig cfg;
};

struct hf_report {
  hunfold::RunReport report;
};

struct hf_coefficient {
  hunfold::PeriodicCoefficient a;
};

struct hf_cell {
  hunfold::CellSolution solution;
  hunfold::Matrix2 A0;
};

namespace {

thread_local std::string last_error;

hf_status fail(hf_status s, std::string msg) {
  last_error = std::move(msg);
  return s;
}

template <class F>
hf_status guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const hunfold::ConfigError& e) {
    return fail(HF_E_CONFIG, e.what());
  } catch (const hunfold::NotConverged& e) {
    return fail(HF_E_NUMERICAL, e.what());
  } catch (const hunfold::ControlNotConverged& e) {
    return fail(HF_E_NUMERICAL, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(HF_E_INVALID_ARGUMENT, e.what());
  } catch (const std::ios_base::failure& e) {
    return fail(HF_E_IO, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(HF_E_IO, e.what());
  } catch (const std::exception& e) {
    return fail(HF_E_INTERNAL, e.what());
  } catch (...) {
    return fail(HF_E_INTERNAL, "unknown exception");
  }
}

hf_status null_arg(const char* what) { return fail(HF_E_INVALID_ARGUMENT, std::string(what) + " is null"); }

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

hunfold::Point pt(hf_point p) { return {p.x1, p.x2, p.x3}; }
hf_point pt(const hunfold::Point& p) { return {p.x1, p.x2, p.x3}; }

std::optional<hunfold::Command> maybe_command(const char* c) {
  if (!c) return std::nullopt;
  return hunfold::parse_command(c);
}

}  // namespace

extern "C" {

const char* hf_version(void) { return "1.0.0"; }
const char* hf_last_error(void) { return last_error.c_str(); }

const char* hf_status_name(hf_status s) {
  switch (s) {
    case HF_OK: return "ok";
    case HF_E_INVALID_ARGUMENT: return "invalid argument";
    case HF_E_CONFIG: return "config error";
    case HF_E_NUMERICAL: return "numerical failure";
    case HF_E_IO: return "i/o error";
    case HF_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

hf_status hf_set_threads(int n) {
  if (n < 1) return fail(HF_E_INVALID_ARGUMENT, "thread count must be positive");
  hunfold::set_thread_count(n);
  return HF_OK;
}

int hf_threads(void) { return hunfold::thread_count(); }
void hf_string_free(char* s) { std::free(s); }

hf_status hf_group_mul(hf_point p, hf_point q, hf_point* out) {
  if (!out) return null_arg("out");
  *out = pt(hunfold::group_mul(pt(p), pt(q)));
  return HF_OK;
}

hf_status hf_group_inv(hf_point p, hf_point* out) {
  if (!out) return null_arg("out");
  *out = pt(hunfold::group_inv(pt(p)));
  return HF_OK;
}

hf_status hf_dilate(double lambda, hf_point p, hf_point* out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = pt(hunfold::dilate(lambda, pt(p)));
    return HF_OK;
  });
}

hf_status hf_hnorm(hf_point p, double* out) {
  if (!out) return null_arg("out");
  *out = hunfold::hnorm(pt(p));
  return HF_OK;
}

hf_status hf_decompose(double eps, hf_point x, hf_cell_index* k, hf_point* y) {
  if (!k || !y) return null_arg("output");
  return guarded([&] {
    const auto d = hunfold::eps_decompose(eps, pt(x));
    *k = {d.index.k1, d.index.k2, d.index.k3};
    *y = pt(d.frac);
    return HF_OK;
  });
}

hf_status hf_reconstruct(double eps, hf_cell_index k, hf_point y, hf_point* out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = pt(hunfold::reconstruct(eps, {k.k1, k.k2, k.k3}, pt(y)));
    return HF_OK;
  });
}

hf_status hf_config_default(const char* command, hf_config** out) {
  if (!command || !out) return null_arg("argument");
  return guarded([&] {
    *out = new hf_config{hunfold::default_config(hunfold::parse_command(command))};
    return HF_OK;
  });
}

hf_status hf_config_load(const char* path, const char* command, hf_config** out) {
  if (!path || !out) return null_arg("argument");
  return guarded([&] {
    *out = new hf_config{hunfold::load_config(path, maybe_command(command))};
    return HF_OK;
  });
}

hf_status hf_config_parse(const char* text, const char* command, hf_config** out) {
  if (!text || !out) return null_arg("argument");
  return guarded([&] {
    *out = new hf_config{hunfold::parse_config(std::string_view(text), maybe_command(command))};
    return HF_OK;
  });
}

hf_status hf_config_from_json(const char* json, hf_config** out) {
  if (!json || !out) return null_arg("argument");
  return guarded([&] {
    *out = new hf_config{hunfold::config_from_json(json)};
    return HF_OK;
  });
}

hf_status hf_config_set(hf_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return null_arg("argument");
  return guarded([&] {
    auto next = cfg->cfg;
    hunfold::apply_setting(next, key, value);
    next.validate();
    cfg->cfg = std::move(next);
    return HF_OK;
  });
}

hf_status hf_config_to_json(const hf_config* cfg, char** out) {
  if (!cfg || !out) return null_arg("argument");
  return guarded([&] {
    *out = dup(hunfold::config_to_json(cfg->cfg));
    return HF_OK;
  });
}

hf_status hf_config_to_ini(const hf_config* cfg, char** out) {
  if (!cfg || !out) return null_arg("argument");
  return guarded([&] {
    *out = dup(hunfold::to_ini(cfg->cfg));
    return HF_OK;
  });
}

hf_status hf_config_output(const hf_config* cfg, char** out) {
  if (!cfg || !out) return null_arg("argument");
  return guarded([&] {
    *out = dup(cfg->cfg.output);
    return HF_OK;
  });
}

void hf_config_free(hf_config* cfg) { delete cfg; }

hf_status hf_run(const hf_config* cfg, const char* out_dir, hf_report** out) {
  if (!cfg || !out) return null_arg("argument");
  *out = nullptr;
  return guarded([&] {
    auto rep = hunfold::run_experiment(cfg->cfg, out_dir ? out_dir : cfg->cfg.output);
    const bool numerical = rep.numerical_failure;
    *out = new hf_report{std::move(rep)};
    if (numerical) return fail(HF_E_NUMERICAL, "solver did not converge; see result.json");
    return HF_OK;
  });
}

int hf_report_passed(const hf_report* r) { return r && r->report.passed ? 1 : 0; }
int hf_report_numerical_failure(const hf_report* r) { return r && r->report.numerical_failure ? 1 : 0; }
size_t hf_report_check_count(const hf_report* r) { return r ? r->report.checks.size() : 0; }
double hf_report_seconds(const hf_report* r) { return r ? r->report.wall_seconds : 0.0; }

hf_status hf_report_check(const hf_report* r, size_t i, const char** name, int* passed, int* gating,
                          const char** detail) {
  if (!r) return null_arg("report");
  if (i >= r->report.checks.size()) return fail(HF_E_INVALID_ARGUMENT, "check index out of range");
  const auto& c = r->report.checks[i];
  if (name) *name = c.name.c_str();
  if (passed) *passed = c.passed ? 1 : 0;
  if (gating) *gating = c.gating ? 1 : 0;
  if (detail) *detail = c.detail.c_str();
  return HF_OK;
}

hf_status hf_report_json(const hf_report* r, char** out) {
  if (!r || !out) return null_arg("argument");
  return guarded([&] {
    *out = dup(r->report.result_json);
    return HF_OK;
  });
}

void hf_report_free(hf_report* r) { delete r; }

hf_status hf_coefficient_identity(hf_coefficient** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new hf_coefficient{hunfold::PeriodicCoefficient::identity()};
    return HF_OK;
  });
}

hf_status hf_coefficient_constant(const double m[4], hf_coefficient** out) {
  if (!m || !out) return null_arg("argument");
  return guarded([&] {
    *out = new hf_coefficient{hunfold::PeriodicCoefficient::constant({m[0], m[1], m[2], m[3]})};
    return HF_OK;
  });
}

hf_status hf_coefficient_laminate(double a0, double a1, int freq, hf_coefficient** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new hf_coefficient{hunfold::PeriodicCoefficient::laminate(a0, a1, freq)};
    return HF_OK;
  });
}

hf_status hf_coefficient_checkerboard(double low, double high, hf_coefficient** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new hf_coefficient{hunfold::PeriodicCoefficient::checkerboard(low, high)};
    return HF_OK;
  });
}

hf_status hf_coefficient_eval(const hf_coefficient* a, hf_point y, double out[4]) {
  if (!a || !out) return null_arg("argument");
  return guarded([&] {
    const auto m = a->a.A(hunfold::frac_part_H(pt(y)));
    for (int i = 0; i < 4; ++i) out[i] = m[i];
    return HF_OK;
  });
}

void hf_coefficient_free(hf_coefficient* a) { delete a; }

hf_status hf_cell_solve(const hf_coefficient* a, int n, double tol, hf_cell** out) {
  if (!a || !out) return null_arg("argument");
  if (!(tol > 0.0 && tol < 1.0)) return fail(HF_E_INVALID_ARGUMENT, "tolerance must be in (0, 1)");
  return guarded([&] {
    auto sol = hunfold::solve_cell(a->a, n, {tol, 20000, true});
    const auto A0 = hunfold::homogenized_matrix(a->a, sol);
    *out = new hf_cell{std::move(sol), A0};
    return HF_OK;
  });
}

hf_status hf_cell_homogenized(const hf_cell* c, double out[4]) {
  if (!c || !out) return null_arg("argument");
  for (int i = 0; i < 4; ++i) out[i] = c->A0[i];
  return HF_OK;
}

hf_status hf_cell_corrector(const hf_cell* c, int i, hf_point y, double* out) {
  if (!c || !out) return null_arg("argument");
  if (i != 1 && i != 2) return fail(HF_E_INVALID_ARGUMENT, "corrector index must be 1 or 2");
  return guarded([&] {
    *out = c->solution.Z(i, pt(y));
    return HF_OK;
  });
}

void hf_cell_free(hf_cell* c) { delete c; }

}  // extern "C"
