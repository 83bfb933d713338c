#include "simloss/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace simloss {

namespace {

using nlohmann::json;

json optional_to_json(const std::optional<double>& value) {
  if (value) {
    return *value;
  }
  return nullptr;
}

std::optional<double> optional_from_json(const json& value) {
  if (value.is_null()) {
    return std::nullopt;
  }
  return value.get<double>();
}

/// per_seed as {metric: [v_seed0, v_seed1, ...]} with null for undefined.
json per_seed_to_json(const std::vector<RunMetrics>& per_seed,
                      std::map<std::string, std::optional<double>> RunMetrics::*
                          member) {
  json out = json::object();
  if (per_seed.empty()) {
    return out;
  }
  for (const auto& entry : per_seed.front().*member) {
    json values = json::array();
    for (const auto& run : per_seed) {
      values.push_back(optional_to_json((run.*member).at(entry.first)));
    }
    out[entry.first] = std::move(values);
  }
  return out;
}

std::string format_metric(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.4f", value);
  return buffer;
}

std::string format_grid(double value) {
  std::ostringstream out;
  out << value;
  return out.str();
}

}  // namespace

std::string report_to_json(const ExperimentReport& report) {
  json rows = json::array();
  for (const auto& row : report.rows) {
    json best = json::object();
    for (const auto& metric : row.best) {
      best[metric] = true;
    }
    rows.push_back(
        {{"grid_value", row.grid_value},
         {"per_seed",
          {{"validation",
            per_seed_to_json(row.per_seed, &RunMetrics::validation)},
           {"test", per_seed_to_json(row.per_seed, &RunMetrics::test)}}},
         {"mean",
          {{"validation",
            [&] {
              json out = json::object();
              for (const auto& entry : row.mean.validation) {
                out[entry.first] = optional_to_json(entry.second);
              }
              return out;
            }()},
           {"test",
            [&] {
              json out = json::object();
              for (const auto& entry : row.mean.test) {
                out[entry.first] = optional_to_json(entry.second);
              }
              return out;
            }()}}},
         {"skipped",
          {{"validation", row.skipped_validation},
           {"test", row.skipped_test}}},
         {"marks", row.marks},
         {"p_values", row.p_values},
         {"best", std::move(best)}});
  }

  const json root = {{"config", json::parse(report.config.to_json_string())},
                     {"rows", std::move(rows)},
                     {"meta",
                      {{"version", report.meta.version},
                       {"wall_time_seconds", report.meta.wall_time_seconds},
                       {"baseline_is_cce", report.meta.baseline_is_cce}}}};
  return root.dump(2);
}

ExperimentReport report_from_json(const std::string& text) {
  const json root = json::parse(text);
  ExperimentReport report;
  report.config =
      ExperimentConfig::from_json_string(root.at("config").dump());

  for (const auto& row_json : root.at("rows")) {
    GridRow row;
    row.grid_value = row_json.at("grid_value").get<double>();

    const json& per_seed_val = row_json.at("per_seed").at("validation");
    const json& per_seed_test = row_json.at("per_seed").at("test");
    const std::size_t seed_count = report.config.seeds.size();
    row.per_seed.resize(seed_count);
    for (const auto& entry : per_seed_val.items()) {
      for (std::size_t k = 0; k < seed_count; ++k) {
        row.per_seed[k].validation[entry.key()] =
            optional_from_json(entry.value().at(k));
      }
    }
    for (const auto& entry : per_seed_test.items()) {
      for (std::size_t k = 0; k < seed_count; ++k) {
        row.per_seed[k].test[entry.key()] =
            optional_from_json(entry.value().at(k));
      }
    }
    for (const auto& entry : row_json.at("mean").at("validation").items()) {
      row.mean.validation[entry.key()] = optional_from_json(entry.value());
    }
    for (const auto& entry : row_json.at("mean").at("test").items()) {
      row.mean.test[entry.key()] = optional_from_json(entry.value());
    }
    row.skipped_validation = row_json.at("skipped")
                                 .at("validation")
                                 .get<std::map<std::string, int>>();
    row.skipped_test =
        row_json.at("skipped").at("test").get<std::map<std::string, int>>();
    row.marks =
        row_json.at("marks").get<std::map<std::string, std::string>>();
    row.p_values =
        row_json.at("p_values").get<std::map<std::string, double>>();
    for (const auto& entry : row_json.at("best").items()) {
      if (entry.value().get<bool>()) {
        row.best.push_back(entry.key());
      }
    }
    report.rows.push_back(std::move(row));
  }

  const json& meta = root.at("meta");
  report.meta.version = meta.at("version").get<std::string>();
  report.meta.wall_time_seconds = meta.at("wall_time_seconds").get<double>();
  report.meta.baseline_is_cce = meta.at("baseline_is_cce").get<bool>();
  return report;
}

std::string report_to_markdown(const ExperimentReport& report) {
  const auto& metrics = report.config.metrics;
  std::ostringstream out;
  const bool order_grid = report.config.task == Task::ordinal ||
                          (report.config.task == Task::external &&
                           report.config.external.embeddings_path.empty());
  const std::string grid_label = order_grid ? "r" : "l";

  out << "# Grid search report\n\n";
  out << "Baseline: " << grid_label << " = " << format_grid(report.config.baseline)
      << (report.meta.baseline_is_cce ? " (plain cross entropy)" : "")
      << ". Means over " << report.config.seeds.size()
      << " paired runs; best validation values are bold; test values carry"
         " +/- when significantly better/worse than the baseline"
         " (two-sided signed-rank test, alpha 0.05).\n\n";

  out << "| " << grid_label << " |";
  for (const auto& metric : metrics) {
    out << " val " << metric << " |";
  }
  for (const auto& metric : metrics) {
    out << " test " << metric << " |";
  }
  out << "\n|---|";
  for (std::size_t i = 0; i < 2 * metrics.size(); ++i) {
    out << "---|";
  }
  out << '\n';

  for (const auto& row : report.rows) {
    out << "| " << format_grid(row.grid_value) << " |";
    for (const auto& metric : metrics) {
      const auto& mean = row.mean.validation.at(metric);
      std::string cell = mean ? format_metric(*mean) : "n/a";
      if (std::find(row.best.begin(), row.best.end(), metric) !=
          row.best.end()) {
        cell = "**" + cell + "**";
      }
      out << ' ' << cell << " |";
    }
    for (const auto& metric : metrics) {
      const auto& mean = row.mean.test.at(metric);
      std::string cell = mean ? format_metric(*mean) : "n/a";
      const auto mark = row.marks.find(metric);
      if (mark != row.marks.end()) {
        cell += " (" + mark->second + ")";
      }
      out << ' ' << cell << " |";
    }
    out << '\n';
  }
  return out.str();
}

void emit_report(const ExperimentReport& report, const std::string& out_dir,
                 ReportFormat format) {
  const auto write_file = [&](const std::string& name,
                              const std::string& content) {
    const std::string path = out_dir + "/" + name;
    std::ofstream out(path);
    if (!out) {
      throw std::runtime_error("cannot write report file: " + path);
    }
    out << content;
    if (!out) {
      throw std::runtime_error("failed writing report file: " + path);
    }
  };
  if (format == ReportFormat::json || format == ReportFormat::both) {
    write_file("report.json", report_to_json(report) + "\n");
  }
  if (format == ReportFormat::markdown || format == ReportFormat::both) {
    write_file("report.md", report_to_markdown(report));
  }
}

}  // namespace simloss
