#pragma once

// Run artifacts: versioned CSV tables, the run manifest and the result record.
// Numbers are written with 17 significant digits so reruns are byte-identical.

#include "fockprog/dynamics.hpp"
#include "fockprog/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace fockprog {

inline constexpr int kCsvVersion = 1;

std::string format_number(double v);  // "%.17g", "inf" / "-inf" / "nan"
double parse_number_field(const std::string& s);

struct CsvTable {
    std::string kind;  // "series", "fig8", ...
    // extra "# key = value" header lines, written in order
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(const std::vector<double>& values);
    void add_row(std::vector<std::string> values);
    double number(std::size_t row, const std::string& column) const;
    std::size_t column_index(const std::string& name) const;
};

// Header: "# fockprog-csv v1 kind=<kind>", one line echoing the parameters in
// linear GHz / MHz when given, then the meta lines and the column row.
void write_csv(std::ostream& out, const CsvTable& table, const SystemParams* params = nullptr);
void save_csv(const std::string& path, const CsvTable& table, const SystemParams* params = nullptr);
// Rejects other versions and ragged rows; comment lines beyond the first are
// read back into `meta` when they are "key = value".
CsvTable read_csv(std::istream& in);
CsvTable load_csv(const std::string& path);

// t_ns, q_expect, na_expect, nb_expect, norm_or_trace
CsvTable series_table(const std::vector<Sample>& samples);

struct RunManifest {
    std::string command;
    std::string program_file;
    std::string mode;  // ideal | schedule
    double ramp_ns = 0.0;
    DecoherenceParams decoherence;
    double rtol = 0.0;
    double atol = 0.0;
    double dt_max_ns = 0.0;
    std::size_t n_traj = 0;
    std::uint64_t seed = 0;
    std::uint64_t params_hash = 0;
};
void write_manifest(std::ostream& out, const RunManifest& m);
RunManifest read_manifest(std::istream& in);

struct ResultRecord {
    double fidelity = 0.0;
    double std_error = 0.0;
    double wall_time_s = 0.0;
    std::map<std::string, std::string> extra;  // written sorted by key
};
void write_result(std::ostream& out, const ResultRecord& r);
ResultRecord read_result(std::istream& in);

// Writes `text` to `dir/name`, creating `dir`; throws ValidationError when the
// directory cannot be created or the file cannot be written.
std::string write_text_file(const std::string& dir, const std::string& name, const std::string& text);

}  // namespace fockprog
