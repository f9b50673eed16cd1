// tollcast: exact equilibria and externality prices for road networks with
// piecewise-affine travel times. All numbers in and out are exact rationals;
// JSON goes to stdout, diagnostics to stderr.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "tollcast/curve.hpp"
#include "tollcast/equilibrium.hpp"
#include "tollcast/errors.hpp"
#include "tollcast/json_io.hpp"
#include "tollcast/paths.hpp"
#include "tollcast/pricing.hpp"

namespace {

using tollcast::Budget;
using tollcast::EquilibriumCurve;
using tollcast::Flow;
using tollcast::Instance;
using tollcast::Json;
using tollcast::Rational;

struct OutputOptions {
  std::string out_path;
  int decimal = -1;
};

// Adds "<key>_decimal" next to every exact rational string.
void add_decimal_fields(Json& node, int digits) {
  if (node.is_array()) {
    for (auto& child : node) add_decimal_fields(child, digits);
    return;
  }
  if (!node.is_object()) return;
  Json augmented = Json::object();
  for (auto it = node.begin(); it != node.end(); ++it) {
    augmented[it.key()] = *it;
    if (it->is_string()) {
      auto r = Rational::parse(it->get<std::string>());
      if (r) augmented[it.key() + "_decimal"] = r->decimal(digits);
    } else {
      add_decimal_fields(augmented[it.key()], digits);
    }
  }
  node = std::move(augmented);
}

void emit(Json doc, const OutputOptions& opt) {
  if (opt.decimal >= 0) add_decimal_fields(doc, opt.decimal);
  std::string text = doc.dump(2) + "\n";
  if (opt.out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(opt.out_path);
    if (!out) throw tollcast::ValidationError("", "cannot write " + opt.out_path);
    out << text;
  }
}

std::vector<Rational> parse_lambda(const Instance& inst, const std::string& single,
                                   const std::vector<std::string>& per_class) {
  std::vector<Rational> lambda(inst.externality_count(), Rational(0));
  if (!single.empty()) {
    if (inst.externality_count() != 1) {
      throw tollcast::ValidationError(
          "--lambda", "instance has several externality classes; use --lambda-j");
    }
    auto r = Rational::parse(single);
    if (!r) throw tollcast::ValidationError("--lambda", "not a rational: " + single);
    lambda[0] = *r;
  }
  for (const auto& spec : per_class) {
    auto eq = spec.find('=');
    if (eq == std::string::npos) {
      throw tollcast::ValidationError("--lambda-j", "expected class=value: " + spec);
    }
    std::string cls = spec.substr(0, eq);
    auto r = Rational::parse(spec.substr(eq + 1));
    if (!r) throw tollcast::ValidationError("--lambda-j", "not a rational: " + spec);
    bool known = false;
    for (int j = 0; j < inst.externality_count(); ++j) {
      if (inst.externalities()[j] == cls) {
        lambda[j] = *r;
        known = true;
      }
    }
    if (!known) throw tollcast::ValidationError("--lambda-j", "unknown class " + cls);
  }
  return lambda;
}

Json lambda_to_json(const Instance& inst, const std::vector<Rational>& lambda) {
  Json out = Json::object();
  for (int j = 0; j < inst.externality_count(); ++j) {
    out[inst.externalities()[j]] = lambda[j].str();
  }
  return out;
}

// --- curve export -----------------------------------------------------------

std::vector<Rational> sample_prices(const EquilibriumCurve& curve, int grid) {
  std::vector<Rational> prices;
  for (const auto& [lam, flow] : curve.breakpoints) prices.push_back(lam);
  bool has_ray = false;
  for (const auto& row : curve.terminal.ray) {
    for (const auto& v : row) has_ray = has_ray || !v.is_zero();
  }
  Rational end = curve.terminal.start + (has_ray ? Rational(1) : Rational(0));
  for (int k = 0; k <= grid; ++k) {
    if (end.is_zero()) break;
    prices.push_back(end * Rational(k) / Rational(grid + 1));
  }
  std::sort(prices.begin(), prices.end());
  prices.erase(std::unique(prices.begin(), prices.end()), prices.end());
  return prices;
}

void write_curve_csv(const Instance& inst, const EquilibriumCurve& curve, int grid,
                     int decimal, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw tollcast::ValidationError("", "cannot write " + path);
  std::vector<std::string> header{"lambda"};
  for (int e = 0; e < inst.edge_count(); ++e) header.push_back("load:" + inst.edge(e).id);
  header.push_back("G");
  header.push_back("Phi");
  for (size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  if (decimal >= 0) {
    for (const auto& h : header) out << "," << h << "_dec";
  }
  out << "\n";
  for (const auto& lam : sample_prices(curve, grid)) {
    Flow flow = evaluate(curve, lam);
    std::vector<Rational> row{lam};
    for (int e = 0; e < inst.edge_count(); ++e) row.push_back(flow.load(e));
    row.push_back(total_externality(inst, flow)[0]);
    row.push_back(potential(inst, flow));
    for (size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c].str();
    if (decimal >= 0) {
      for (const auto& v : row) out << "," << v.decimal(decimal);
    }
    out << "\n";
  }
}

void write_curve_svg(const Instance& inst, const EquilibriumCurve& curve, int grid,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw tollcast::ValidationError("", "cannot write " + path);
  const double width = 720, height = 440, ml = 60, mr = 160, mt = 24, mb = 44;
  auto prices = sample_prices(curve, std::max(grid, 32));
  double xmax = 1e-9, ymax = 1e-9;
  std::vector<std::vector<double>> series(inst.edge_count() + 1);
  std::vector<double> xs;
  for (const auto& lam : prices) {
    Flow flow = evaluate(curve, lam);
    xs.push_back(lam.to_double());
    xmax = std::max(xmax, lam.to_double());
    for (int e = 0; e < inst.edge_count(); ++e) {
      double v = flow.load(e).to_double();
      series[e].push_back(v);
      ymax = std::max(ymax, v);
    }
    double g = tollcast::total_externality(inst, flow)[0].to_double();
    series[inst.edge_count()].push_back(g);
    ymax = std::max(ymax, g);
  }
  auto px = [&](double x) { return ml + (width - ml - mr) * (xmax > 0 ? x / xmax : 0.0); };
  auto py = [&](double y) { return height - mb - (height - mt - mb) * (ymax > 0 ? y / ymax : 0.0); };
  const char* palette[] = {"#888c46", "#2a6f97", "#bc4749", "#7b5e7b", "#468faf",
                           "#b08968", "#6a994e", "#c44536", "#5f0f40", "#168aad"};
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
      << "' viewBox='0 0 " << width << " " << height << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<line x1='" << ml << "' y1='" << height - mb << "' x2='" << width - mr << "' y2='"
      << height - mb << "' stroke='black'/>\n";
  out << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << height - mb
      << "' stroke='black'/>\n";
  out << "<text x='" << (width - mr + ml) / 2 << "' y='" << height - 10
      << "' font-size='12' text-anchor='middle'>price</text>\n";
  out << "<text x='14' y='" << (height - mb + mt) / 2
      << "' font-size='12' transform='rotate(-90 14 " << (height - mb + mt) / 2
      << ")' text-anchor='middle'>load / externality</text>\n";
  out << "<text x='" << ml << "' y='" << height - mb + 16 << "' font-size='10'>0</text>\n";
  out << "<text x='" << width - mr << "' y='" << height - mb + 16
      << "' font-size='10' text-anchor='end'>" << xmax << "</text>\n";
  out << "<text x='" << ml - 4 << "' y='" << mt + 4
      << "' font-size='10' text-anchor='end'>" << ymax << "</text>\n";
  for (size_t s = 0; s < series.size(); ++s) {
    bool is_g = s + 1 == series.size();
    out << "<polyline fill='none' stroke='" << (is_g ? "#000000" : palette[s % 10])
        << "' stroke-width='" << (is_g ? 2.5 : 1.2) << "' points='";
    for (size_t k = 0; k < xs.size(); ++k) {
      out << px(xs[k]) << "," << py(series[s][k]) << " ";
    }
    out << "'/>\n";
    double ly = mt + 16 + 14 * static_cast<double>(s);
    out << "<text x='" << width - mr + 10 << "' y='" << ly << "' font-size='11' fill='"
        << (is_g ? "#000000" : palette[s % 10]) << "'>"
        << (is_g ? std::string("G") : "load " + inst.edge(static_cast<int>(s)).id)
        << "</text>\n";
  }
  // Breakpoint markers on the externality series.
  for (const auto& [lam, flow] : curve.breakpoints) {
    double g = tollcast::total_externality(inst, flow)[0].to_double();
    out << "<circle cx='" << px(lam.to_double()) << "' cy='" << py(g)
        << "' r='3.5' fill='black'/>\n";
  }
  out << "</svg>\n";
}

// --- subcommands ------------------------------------------------------------

int run(int argc, char** argv) {
  CLI::App app{
      "tollcast: exact Wardrop equilibria and externality prices for "
      "piecewise-affine road networks"};
  app.require_subcommand(1);

  std::string instance_path, out_path, flow_path, single_lambda, budget_spec, svg_path,
      csv_path, credits_spec;
  std::vector<std::string> lambda_per_class;
  int decimal = -1, grid = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("instance", instance_path, "instance JSON file")->required();
    cmd->add_option("--out", out_path, "write the JSON result to a file");
    cmd->add_option("--decimal", decimal, "add N-digit decimal approximations");
  };

  auto* c_validate = app.add_subcommand("validate", "parse and validate an instance");
  add_common(c_validate);

  auto* c_eq = app.add_subcommand("equilibrium", "equilibrium at a fixed price vector");
  add_common(c_eq);
  c_eq->add_option("--lambda", single_lambda, "price (single-class instances)");
  c_eq->add_option("--lambda-j", lambda_per_class, "per-class price as class=value");

  auto* c_curve = app.add_subcommand("curve", "full price-to-equilibrium curve");
  add_common(c_curve);
  c_curve->add_option("--grid", grid, "extra evenly spaced sample prices");
  c_curve->add_option("--csv", csv_path, "write breakpoint+grid samples as CSV");
  c_curve->add_option("--svg", svg_path, "write a line chart of loads and G");

  auto* c_minprice = app.add_subcommand("min-price", "minimal price meeting a budget");
  add_common(c_minprice);
  c_minprice->add_option("--budget", budget_spec, "externality budget")->required();

  auto* c_impl = app.add_subcommand("implement-budget", "prices implementing a budget");
  add_common(c_impl);
  c_impl->add_option("--budget", budget_spec, "class=value[,class=value...]")->required();

  auto* c_check = app.add_subcommand("check-flow", "is a given flow implementable?");
  add_common(c_check);
  c_check->add_option("--flow", flow_path, "flow JSON file")->required();

  auto* c_minb = app.add_subcommand("min-budget", "per-class minimum feasible budget");
  add_common(c_minb);

  auto* c_credit = app.add_subcommand("credit-scheme", "market price interval of a scheme");
  add_common(c_credit);
  c_credit->add_option("--credits", credits_spec, "number of issued credits")->required();

  CLI11_PARSE(app, argc, argv);
  OutputOptions oopt{out_path, decimal};
  Instance inst = tollcast::load_instance(instance_path);

  auto parse_rational_flag = [](const std::string& text, const char* flag) {
    auto r = Rational::parse(text);
    if (!r) throw tollcast::ValidationError(flag, "not a rational: " + text);
    return *r;
  };

  if (c_validate->parsed()) {
    Json doc;
    doc["nodes"] = inst.node_count();
    doc["edges"] = inst.edge_count();
    doc["commodities"] = inst.commodity_count();
    doc["externalities"] = inst.externalities();
    doc["pieces_per_edge"] = inst.piece_count();
    doc["strictly_increasing"] = inst.strictly_increasing();
    doc["affine_externality"] = inst.has_affine_externality();
    emit(std::move(doc), oopt);
    return 0;
  }

  if (c_eq->parsed()) {
    auto lambda = parse_lambda(inst, single_lambda, lambda_per_class);
    auto res = tollcast::solve_equilibrium(inst, lambda);
    Json doc;
    doc["lambda"] = lambda_to_json(inst, lambda);
    doc["perturbed"] = res.perturbed;
    Json flow = tollcast::flow_to_json(inst, res.flow);
    for (auto it = flow.begin(); it != flow.end(); ++it) doc[it.key()] = *it;
    doc["PhiPriced"] = tollcast::potential(inst, res.flow, lambda).str();
    if (res.perturbed) {
      std::cerr << "note: flat cost pieces; reporting the limit equilibrium selection\n";
    }
    emit(std::move(doc), oopt);
    return 0;
  }

  if (c_curve->parsed()) {
    auto curve = tollcast::trace_curve(inst);
    if (curve.perturbed) {
      std::cerr << "warning: flat cost pieces; curve is one valid equilibrium "
                   "selection (limit of slope-perturbed instances)\n";
    }
    Json doc;
    doc["perturbed"] = curve.perturbed;
    Json bps = Json::array();
    for (const auto& [lam, flow] : curve.breakpoints) {
      Json bp;
      bp["lambda"] = lam.str();
      Json f = tollcast::flow_to_json(inst, flow);
      for (auto it = f.begin(); it != f.end(); ++it) bp[it.key()] = *it;
      bps.push_back(std::move(bp));
    }
    doc["breakpoints"] = std::move(bps);
    Json term;
    term["lambda_start"] = curve.terminal.start.str();
    term["base"] = tollcast::flow_to_json(inst, curve.terminal.base);
    Json ray = Json::object();
    for (int i = 0; i < inst.commodity_count(); ++i) {
      Json per_edge = Json::object();
      for (int e = 0; e < inst.edge_count(); ++e) {
        per_edge[inst.edge(e).id] = curve.terminal.ray[i][e].str();
      }
      ray[std::to_string(i)] = std::move(per_edge);
    }
    term["ray"] = std::move(ray);
    doc["terminal"] = std::move(term);
    if (!csv_path.empty()) write_curve_csv(inst, curve, grid, decimal, csv_path);
    if (!svg_path.empty()) write_curve_svg(inst, curve, grid, svg_path);
    emit(std::move(doc), oopt);
    return 0;
  }

  if (c_minprice->parsed()) {
    Rational budget = parse_rational_flag(budget_spec, "--budget");
    auto report = tollcast::min_price(inst, budget);
    Json doc;
    doc["lambda"] = report.lambda_star.str();
    Json flow = tollcast::flow_to_json(inst, report.flow);
    doc["flow"] = flow["flows"];
    doc["edge_loads"] = flow["edge_loads"];
    doc["G"] = flow["G"];
    doc["Phi"] = flow["Phi"];
    doc["iterations"] = report.iterations;
    doc["bound"] = report.iteration_bound.get_str();
    std::cerr << "minimal price " << report.lambda_star.str() << " after "
              << report.iterations << " bisection step(s), bound "
              << report.iteration_bound.get_str() << "\n";
    emit(std::move(doc), oopt);
    return 0;
  }

  if (c_impl->parsed()) {
    Budget budget;
    budget.bounds.assign(inst.externality_count(), Rational(0));
    std::vector<char> seen(inst.externality_count(), 0);
    std::stringstream ss(budget_spec);
    std::string part;
    while (std::getline(ss, part, ',')) {
      auto eq = part.find('=');
      if (eq == std::string::npos) {
        throw tollcast::ValidationError("--budget", "expected class=value: " + part);
      }
      std::string cls = part.substr(0, eq);
      bool known = false;
      for (int j = 0; j < inst.externality_count(); ++j) {
        if (inst.externalities()[j] == cls) {
          budget.bounds[j] = parse_rational_flag(part.substr(eq + 1), "--budget");
          seen[j] = 1;
          known = true;
        }
      }
      if (!known) throw tollcast::ValidationError("--budget", "unknown class " + cls);
    }
    for (int j = 0; j < inst.externality_count(); ++j) {
      if (!seen[j]) {
        throw tollcast::ValidationError("--budget",
                                        "missing bound for class " + inst.externalities()[j]);
      }
    }
    auto res = tollcast::implement_budget(inst, budget);
    Json doc;
    doc["lambda"] = lambda_to_json(inst, res.lambda);
    Json flow = tollcast::flow_to_json(inst, res.flow);
    for (auto it = flow.begin(); it != flow.end(); ++it) doc[it.key()] = *it;
    emit(std::move(doc), oopt);
    return 0;
  }

  if (c_check->parsed()) {
    Flow flow = tollcast::load_flow(inst, flow_path);
    auto report = tollcast::check_implementable(inst, flow);
    Json doc;
    doc["implementable"] = report.implementable;
    doc["lambda"] = report.lambda ? lambda_to_json(inst, *report.lambda) : Json();
    doc["gap"] = report.gap.str();
    emit(std::move(doc), oopt);
    return 0;
  }

  if (c_minb->parsed()) {
    auto mins = tollcast::min_feasible_budget(inst);
    Json doc;
    Json per_class = Json::object();
    for (int j = 0; j < inst.externality_count(); ++j) {
      per_class[inst.externalities()[j]] = mins[j].str();
    }
    doc["B_min"] = std::move(per_class);
    emit(std::move(doc), oopt);
    return 0;
  }

  if (c_credit->parsed()) {
    Rational credits = parse_rational_flag(credits_spec, "--credits");
    auto interval = tollcast::market_price_interval(inst, credits);
    Json doc;
    doc["lambda_lo"] = interval.lo.str();
    doc["lambda_hi"] = interval.hi ? Json(interval.hi->str()) : Json("inf");
    doc["witness_lo"] =
        interval.witness_lo ? tollcast::flow_to_json(inst, *interval.witness_lo) : Json();
    doc["witness_hi"] =
        interval.witness_hi ? tollcast::flow_to_json(inst, *interval.witness_hi) : Json();
    emit(std::move(doc), oopt);
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const tollcast::InfeasibleBudgetError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    for (const auto& line : e.certificate()) std::cerr << "  certificate: " << line << "\n";
    return 3;
  } catch (const tollcast::UnsupportedExternalityError& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return 4;
  } catch (const tollcast::ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const tollcast::PathLimitError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
