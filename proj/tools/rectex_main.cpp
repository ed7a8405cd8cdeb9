#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rectex/compression.hpp"
#include "rectex/conversion.hpp"
#include "rectex/csv.hpp"
#include "rectex/errors.hpp"
#include "rectex/network_io.hpp"
#include "rectex/region_count.hpp"
#include "rectex/rng.hpp"
#include "rectex/sgn.hpp"
#include "rectex/training.hpp"

namespace {

using nlohmann::json;
using namespace rectex;

json network_json(const NetworkFile& net) { return json::parse(to_json_text(net)); }

// Affine units behind the first decision surface of any network kind; used
// to aim boundary probes.
std::vector<AffineUnit> first_surface_units(const NetworkFile& net) {
  if (const auto* relu = std::get_if<ReluNetwork>(&net)) {
    std::vector<AffineUnit> units = relu->positive_units;
    units.insert(units.end(), relu->negative_units.begin(), relu->negative_units.end());
    return units;
  }
  if (const auto* thr = std::get_if<ThresholdNetwork>(&net)) {
    std::vector<AffineUnit> units;
    for (std::size_t i = 0; i < thr->layers.front().fan_out(); ++i) {
      units.push_back(thr->layers.front().unit(i));
    }
    return units;
  }
  const auto& gen = std::get<GeneralNetwork>(net);
  std::vector<AffineUnit> units;
  for (std::size_t i = 0; i < gen.layers.front().linear.fan_out(); ++i) {
    units.push_back(gen.layers.front().linear.unit(i));
  }
  return units;
}

int run_convert(const std::string& in, const std::string& form, const std::string& out,
                bool force) {
  const NetworkFile file = load_network(in);
  const auto* relu = std::get_if<ReluNetwork>(&file);
  if (!relu) {
    std::cerr << "convert: input must be a rectifier network\n";
    return 1;
  }
  const std::size_t cap =
      force ? std::numeric_limits<std::size_t>::max() : default_first_layer_cap;
  const ThresholdConversion conv =
      form == "dnf" ? to_threshold_dnf(*relu, cap) : to_threshold_cnf(*relu, cap);
  if (!out.empty()) save_network(out, NetworkFile{conv.network});
  json report{{"n1", conv.report.n1},
              {"n2", conv.report.n2},
              {"first_layer_units", conv.report.first_layer_units},
              {"second_layer_units", conv.report.second_layer_units},
              {"form", form}};
  std::cout << report.dump(2) << '\n';
  return 0;
}

int run_verify(const std::string& a_path, const std::string& b_path, std::size_t samples,
               std::uint64_t seed, bool boundary) {
  const NetworkFile a = load_network(a_path);
  const NetworkFile b = load_network(b_path);
  if (network_dim(a) != network_dim(b)) {
    std::cerr << "verify: networks have different input dimensions\n";
    return 1;
  }
  const std::size_t dim = network_dim(a);

  std::vector<std::vector<double>> points;
  points.reserve(samples);
  SplitRng rng(seed, 0x76657269);
  for (std::size_t i = 0; i < samples; ++i) {
    std::vector<double> x(dim);
    for (double& v : x) v = rng.normal();
    points.push_back(std::move(x));
  }
  std::size_t boundary_count = 0;
  if (boundary) {
    const std::vector<AffineUnit> units = first_surface_units(a);
    for (const AffineUnit& u : units) {
      const double nn = dot(u.weights, u.weights);
      if (nn == 0.0) continue;
      for (int rep = 0; rep < 3; ++rep) {
        std::vector<double> x(dim);
        for (double& v : x) v = rng.normal();
        const double shift = u.pre_activation(x) / nn;
        for (std::size_t j = 0; j < dim; ++j) x[j] -= shift * u.weights[j];
        points.push_back(std::move(x));
        ++boundary_count;
        if (boundary_count >= 1000) break;
      }
      if (boundary_count >= 1000) break;
    }
  }

  std::size_t disagreements = 0;
  json first = nullptr;
  for (const auto& x : points) {
    if (evaluate_network(a, x) != evaluate_network(b, x)) {
      if (disagreements == 0) first = x;
      ++disagreements;
    }
  }
  json report{{"samples", samples},
              {"boundary_points", boundary_count},
              {"disagreements", disagreements},
              {"first_disagreement", first},
              {"agree", disagreements == 0}};
  std::cout << report.dump(2) << '\n';
  return disagreements == 0 ? 0 : 1;
}

int run_compress(const std::string& in, const std::string& mode, const std::string& out) {
  const Matrix raw = load_matrix_csv(in);
  if (raw.cols() == 0 || (raw.cols() & (raw.cols() - 1)) != 0) {
    std::cerr << "compress: unit count must be a power of two\n";
    return 2;
  }
  const VMatrix v(raw);
  if (mode == "exact") {
    const auto result = exact_factor(v);
    if (const auto* fail = std::get_if<NotFactorable>(&result)) {
      json report{{"mode", "exact"}, {"factorable", false}, {"violating_column", fail->column}};
      std::cout << report.dump(2) << '\n';
      return 1;
    }
    const UMatrix& u = std::get<UMatrix>(result);
    if (!out.empty()) save_matrix_csv(out, u.m);
    const double residual = induced_inf_norm(transpose(subtract(v.m, expanded_product(u))));
    json report{{"mode", "exact"}, {"factorable", true}, {"residual", residual}};
    std::cout << report.dump(2) << '\n';
    return 0;
  }
  const InfnormFactorization lp = min_infnorm_factor(v);
  if (!out.empty()) save_matrix_csv(out, lp.u.m);
  json report{{"mode", "lp"},
              {"objective", lp.objective},
              {"duality_gap", lp.duality_gap},
              {"dual_infeasibility", lp.dual_infeasibility},
              {"iterations", lp.iterations}};
  std::cout << report.dump(2) << '\n';
  return 0;
}

int run_margin_audit(const std::string& v_path, const std::string& u_path,
                     const std::string& data_path, bool no_bias_slot) {
  const VMatrix v{load_matrix_csv(v_path)};
  const UMatrix u{load_matrix_csv(u_path)};
  const Dataset data = load_dataset_csv(data_path);
  if (data.dim != v.dim()) {
    std::cerr << "margin-audit: dataset dimension does not match the unit bank\n";
    return 1;
  }
  std::vector<std::vector<double>> aug;
  aug.reserve(data.size());
  for (const auto& x : data.points) {
    std::vector<double> row = x;
    row.push_back(1.0);
    aug.push_back(std::move(row));
  }
  MarginAuditOptions options;
  options.include_bias_slot = !no_bias_slot;
  const MarginAuditResult audit = margin_audit(v, u, aug, options);

  std::cout << "gamma,bound,residual,passes,argmax_V,argmax_UT\n";
  for (std::size_t i = 0; i < audit.records.size(); ++i) {
    const MarginRecord& r = audit.records[i];
    std::cout << format_double(r.gamma) << ',' << format_double(r.bound) << ','
              << format_double(audit.residual_norm) << ',' << (r.passes ? 1 : 0) << ','
              << r.argmax_v << ',' << r.argmax_ut << '\n';
    if (r.passes && r.argmax_v != r.argmax_ut) {
      std::cerr << "margin-audit: bound satisfied but selections differ at row "
                << (i + 1) << '\n';
    }
  }
  return audit.implication_violations == 0 ? 0 : 1;
}

int run_experiment_cmd(const std::vector<std::size_t>& dims,
                       const std::vector<std::size_t>& ns, std::uint64_t seed,
                       const std::string& out, std::size_t examples, std::size_t test,
                       std::size_t max_epochs) {
  ExperimentOptions options;
  options.total_examples = examples;
  options.test_examples = test;
  options.max_epochs = max_epochs;

  const std::filesystem::path out_path(out);
  const std::filesystem::path stem = out_path.parent_path() / out_path.stem();
  std::vector<json> artifacts;
  const auto rows = rectex::run_experiment(
      dims, ns, seed, options,
      [&](std::size_t n, std::size_t d, const ReluNetwork& labeler, const Dataset& data) {
        const std::string prefix =
            stem.string() + "_n" + std::to_string(n) + "_d" + std::to_string(d);
        save_network(prefix + "_labeler.json", NetworkFile{labeler});
        save_dataset_csv(prefix + "_data.csv", data);
        artifacts.push_back(json{{"n", n},
                                 {"d", d},
                                 {"labeler", prefix + "_labeler.json"},
                                 {"data", prefix + "_data.csv"}});
      });
  save_report_csv(out, rows);
  json report{{"report", out}, {"rows", rows.size()}, {"datasets", artifacts}};
  std::cout << report.dump(2) << '\n';
  return 0;
}

int run_witness(std::size_t n, std::size_t d, bool coordinate_or) {
  if (d == 0) d = n;
  if (n < 1 || d < n) throw guard_error("witness: need 1 <= n <= d");
  if (coordinate_or) {
    if (n < 2) throw guard_error("witness: the coordinate OR needs n >= 2");
    const ThresholdNetwork net = make_coordinate_or_network(n, d);
    json report{{"kind", "coordinate_or"}, {"n", n}, {"d", d},
                {"network", network_json(NetworkFile{net})}};
    std::cout << report.dump(2) << '\n';
    return 0;
  }
  if (n > 20) throw guard_error("witness: n above 20 is not enumerable here");
  const ReluNetwork net = make_axis_disjunction_network(n, d);
  json witnesses = json::array();
  bool all_verified = true;
  for (std::uint64_t mask = 1; mask < (1ull << n); ++mask) {
    const std::vector<double> x = axis_disjunction_witness(n, d, mask);
    // Count subset inequalities -1 + sum of the subset's coordinates >= 0;
    // the witness is good when its own subset is the only one.
    std::size_t nonneg = 0;
    for (std::uint64_t t = 1; t < (1ull << n); ++t) {
      double v = -1.0;
      for (std::size_t k = 0; k < n; ++k) {
        if ((t >> k) & 1ull) v += x[k];
      }
      if (v >= 0.0) ++nonneg;
    }
    const bool positive = net.evaluate(x) == 1;
    const bool verified = positive && nonneg == 1;
    all_verified = all_verified && verified;
    json subset = json::array();
    for (std::size_t k = 0; k < n; ++k) {
      if ((mask >> k) & 1ull) subset.push_back(k + 1);
    }
    witnesses.push_back(json{{"subset", subset},
                             {"point", x},
                             {"nonnegative_subsets", nonneg},
                             {"classified_positive", positive},
                             {"verified", verified}});
  }
  json report{{"kind", "axis_disjunction"},
              {"n", n},
              {"d", d},
              {"network", network_json(NetworkFile{net})},
              {"witnesses", witnesses},
              {"all_verified", all_verified}};
  std::cout << report.dump(2) << '\n';
  return all_verified ? 0 : 1;
}

int run_regions(std::uint64_t n, std::uint64_t d) {
  std::cout << region_count(n, d) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-layer rectifier networks: threshold conversion, compression, audits"};
  app.require_subcommand(1);
  std::function<int()> action;

  auto* convert = app.add_subcommand("convert", "rewrite a rectifier net as a threshold net");
  {
    auto opts = std::make_shared<std::tuple<std::string, std::string, std::string, bool>>();
    auto& [in, form, out, force] = *opts;
    convert->add_option("--in", in, "rectifier network JSON")->required();
    convert->add_option("--form", form, "dnf or cnf")
        ->required()
        ->check(CLI::IsMember({"dnf", "cnf"}));
    convert->add_option("--out", out, "write the threshold network here");
    convert->add_flag("--force", force, "lift the first-layer size cap");
    convert->callback([opts, &action] {
      action = [opts] {
        const auto& [in, form, out, force] = *opts;
        return run_convert(in, form, out, force);
      };
    });
  }

  auto* verify = app.add_subcommand("verify", "compare two networks on sampled points");
  {
    auto opts =
        std::make_shared<std::tuple<std::string, std::string, std::size_t, std::uint64_t, bool>>(
            "", "", 10000, 0, false);
    auto& [a, b, samples, seed, boundary] = *opts;
    verify->add_option("--a", a, "first network JSON")->required();
    verify->add_option("--b", b, "second network JSON")->required();
    verify->add_option("--samples", samples, "random sample count");
    verify->add_option("--seed", seed, "sampling seed");
    verify->add_flag("--boundary", boundary, "add points projected onto unit boundaries");
    verify->callback([opts, &action] {
      action = [opts] {
        const auto& [a, b, samples, seed, boundary] = *opts;
        return run_verify(a, b, samples, seed, boundary);
      };
    });
  }

  auto* compress = app.add_subcommand("compress", "factor a sign-unit bank into compressed parameters");
  {
    auto opts = std::make_shared<std::tuple<std::string, std::string, std::string>>();
    auto& [in, mode, out] = *opts;
    compress->add_option("--in", in, "unit bank CSV")->required();
    compress->add_option("--mode", mode, "exact or lp")
        ->required()
        ->check(CLI::IsMember({"exact", "lp"}));
    compress->add_option("--out", out, "write compressed parameters here");
    compress->callback([opts, &action] {
      action = [opts] {
        const auto& [in, mode, out] = *opts;
        return run_compress(in, mode, out);
      };
    });
  }

  auto* audit = app.add_subcommand("margin-audit", "check the factored bank against the margin bound");
  {
    auto opts = std::make_shared<std::tuple<std::string, std::string, std::string, bool>>();
    auto& [v, u, data, no_bias] = *opts;
    audit->add_option("--v", v, "unit bank CSV")->required();
    audit->add_option("--u", u, "compressed parameters CSV")->required();
    audit->add_option("--data", data, "dataset CSV")->required();
    audit->add_flag("--no-bias-slot", no_bias, "exclude the augmentation slot from the input norm");
    audit->callback([opts, &action] {
      action = [opts] {
        const auto& [v, u, data, no_bias] = *opts;
        return run_margin_audit(v, u, data, no_bias);
      };
    });
  }

  auto* experiment = app.add_subcommand("experiment", "fit students of three designs to generated data");
  {
    struct ExpOpts {
      std::vector<std::size_t> dims;
      std::vector<std::size_t> ns;
      std::uint64_t seed = 0;
      std::string out;
      std::size_t examples = 10000;
      std::size_t test = 1500;
      std::size_t max_epochs = 1000;
    };
    auto opts = std::make_shared<ExpOpts>();
    experiment->add_option("--dims", opts->dims, "input dimensions")->required()->delimiter(',');
    experiment->add_option("--ns", opts->ns, "labeler unit counts")->required()->delimiter(',');
    experiment->add_option("--seed", opts->seed, "experiment seed");
    experiment->add_option("--out", opts->out, "report CSV path")->required();
    experiment->add_option("--examples", opts->examples, "examples per dataset");
    experiment->add_option("--test", opts->test, "held-out examples per dataset");
    experiment->add_option("--max-epochs", opts->max_epochs, "epoch cap per run");
    experiment->callback([opts, &action] {
      action = [opts] {
        return run_experiment_cmd(opts->dims, opts->ns, opts->seed, opts->out,
                                  opts->examples, opts->test, opts->max_epochs);
      };
    });
  }

  auto* witness = app.add_subcommand("witness", "boundary witnesses for the axis disjunction");
  {
    auto opts = std::make_shared<std::tuple<std::size_t, std::size_t, bool>>(0, 0, false);
    auto& [n, d, coord_or] = *opts;
    witness->add_option("--n", n, "coordinate count")->required();
    witness->add_option("--d", d, "input dimension (defaults to n)");
    witness->add_flag("--coordinate-or", coord_or,
                      "emit the threshold OR of coordinate signs instead");
    witness->callback([opts, &action] {
      action = [opts] {
        const auto& [n, d, coord_or] = *opts;
        return run_witness(n, d, coord_or);
      };
    });
  }

  auto* regions = app.add_subcommand("regions", "cells cut by n generic hyperplanes in d dimensions");
  {
    auto opts = std::make_shared<std::tuple<std::uint64_t, std::uint64_t>>(0, 0);
    auto& [n, d] = *opts;
    regions->add_option("--n", n, "hyperplane count")->required();
    regions->add_option("--d", d, "dimension")->required();
    regions->callback([opts, &action] {
      action = [opts] {
        const auto& [n, d] = *opts;
        return run_regions(n, d);
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    return action ? action() : 2;
  } catch (const rectex::solver_guard_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const rectex::guard_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::overflow_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
