#include "fockprog/io.hpp"
#include "fockprog/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fockprog {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

// key = value lines, '#' comments
std::map<std::string, std::string> read_kv(std::istream& in, const char* what) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError(std::string(what) + " line " + std::to_string(lineno) + ": expected key = value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

std::uint64_t parse_u64(const std::string& s, const char* what) {
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
        throw ValidationError(std::string(what) + ": not an unsigned integer: '" + s + "'");
    return v;
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_number_field(const std::string& s) {
    const std::string t = trim(s);
    if (t == "inf") return kInf;
    if (t == "-inf") return -kInf;
    if (t == "nan") return std::nan("");
    double v = 0.0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || r.ec != std::errc{} || r.ptr != t.data() + t.size())
        throw ValidationError("not a number: '" + s + "'");
    return v;
}

void CsvTable::add_row(const std::vector<double>& values) {
    std::vector<std::string> r;
    r.reserve(values.size());
    for (double v : values) r.push_back(format_number(v));
    add_row(std::move(r));
}

void CsvTable::add_row(std::vector<std::string> values) {
    if (values.size() != columns.size())
        throw ValidationError("csv row has " + std::to_string(values.size()) + " fields, expected " +
                              std::to_string(columns.size()));
    rows.push_back(std::move(values));
}

std::size_t CsvTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw ValidationError("csv has no column '" + name + "'");
}

double CsvTable::number(std::size_t row, const std::string& column) const {
    if (row >= rows.size()) throw ValidationError("csv row out of range");
    return parse_number_field(rows[row][column_index(column)]);
}

void write_csv(std::ostream& out, const CsvTable& t, const SystemParams* params) {
    out << "# fockprog-csv v" << kCsvVersion << " kind=" << t.kind << "\n";
    if (params) {
        out << "# params omega_q_ghz=" << format_number(to_ghz(params->omega_q))
            << " omega_12_ghz=" << format_number(to_ghz(params->omega_12))
            << " omega_a_ghz=" << format_number(to_ghz(params->omega_a))
            << " omega_b_ghz=" << format_number(to_ghz(params->omega_b))
            << " g_a_mhz=" << format_number(to_mhz(params->g_a)) << " g_b_mhz=" << format_number(to_mhz(params->g_b))
            << " rabi_mhz=" << format_number(to_mhz(params->rabi_omega))
            << " t_q_ns=" << format_number(params->t_q) << " t_r_ns=" << format_number(params->t_r) << "\n";
    }
    for (const auto& [k, v] : t.meta) out << "# " << k << " = " << v << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
    out << "\n";
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
        out << "\n";
    }
}

void save_csv(const std::string& path, const CsvTable& t, const SystemParams* params) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot write " + path);
    write_csv(f, t, params);
    if (!f) throw ValidationError("write failed: " + path);
}

CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("csv: empty input");
    const std::string magic = "# fockprog-csv v";
    if (line.rfind(magic, 0) != 0) throw ValidationError("csv: missing version header");
    std::istringstream hs(line.substr(magic.size()));
    int version = 0;
    std::string kind;
    hs >> version >> kind;
    if (version != kCsvVersion) throw ValidationError("csv: unsupported version " + std::to_string(version));
    if (kind.rfind("kind=", 0) == 0) t.kind = kind.substr(5);
    bool have_cols = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string body = trim(line.substr(1));
            const auto eq = body.find(" = ");
            if (eq != std::string::npos) t.meta.emplace_back(body.substr(0, eq), body.substr(eq + 3));
            continue;
        }
        auto fields = split(line, ',');
        if (!have_cols) {
            t.columns = std::move(fields);
            have_cols = true;
        } else {
            t.add_row(std::move(fields));
        }
    }
    if (!have_cols) throw ValidationError("csv: no column row");
    return t;
}

CsvTable load_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open " + path);
    return read_csv(f);
}

CsvTable series_table(const std::vector<Sample>& samples) {
    CsvTable t;
    t.kind = "series";
    t.columns = {"t_ns", "q_expect", "na_expect", "nb_expect", "norm_or_trace"};
    for (const auto& s : samples) t.add_row({s.t, s.q, s.na, s.nb, s.norm});
    return t;
}

void write_manifest(std::ostream& out, const RunManifest& m) {
    out << "# fockprog run manifest\n"
        << "command = " << m.command << "\n"
        << "program_file = " << m.program_file << "\n"
        << "mode = " << m.mode << "\n"
        << "ramp_ns = " << format_number(m.ramp_ns) << "\n"
        << "t_q_ns = " << format_number(m.decoherence.t_q) << "\n"
        << "t_r_ns = " << format_number(m.decoherence.t_r) << "\n"
        << "rtol = " << format_number(m.rtol) << "\n"
        << "atol = " << format_number(m.atol) << "\n"
        << "dt_max_ns = " << format_number(m.dt_max_ns) << "\n"
        << "n_traj = " << m.n_traj << "\n"
        << "seed = " << m.seed << "\n"
        << "params_hash = " << m.params_hash << "\n";
}

RunManifest read_manifest(std::istream& in) {
    auto kv = read_kv(in, "manifest");
    auto get = [&](const char* k) {
        auto it = kv.find(k);
        if (it == kv.end()) throw ValidationError(std::string("manifest: missing key ") + k);
        return it->second;
    };
    RunManifest m;
    m.command = get("command");
    m.program_file = get("program_file");
    m.mode = get("mode");
    m.ramp_ns = parse_number_field(get("ramp_ns"));
    m.decoherence = {parse_number_field(get("t_q_ns")), parse_number_field(get("t_r_ns"))};
    m.rtol = parse_number_field(get("rtol"));
    m.atol = parse_number_field(get("atol"));
    m.dt_max_ns = parse_number_field(get("dt_max_ns"));
    m.n_traj = parse_u64(get("n_traj"), "n_traj");
    m.seed = parse_u64(get("seed"), "seed");
    m.params_hash = parse_u64(get("params_hash"), "params_hash");
    return m;
}

void write_result(std::ostream& out, const ResultRecord& r) {
    out << "fidelity = " << format_number(r.fidelity) << "\n"
        << "std_error = " << format_number(r.std_error) << "\n"
        << "wall_time_s = " << format_number(r.wall_time_s) << "\n";
    for (const auto& [k, v] : r.extra) out << k << " = " << v << "\n";
}

ResultRecord read_result(std::istream& in) {
    auto kv = read_kv(in, "result");
    ResultRecord r;
    for (auto& [k, v] : kv) {
        if (k == "fidelity")
            r.fidelity = parse_number_field(v);
        else if (k == "std_error")
            r.std_error = parse_number_field(v);
        else if (k == "wall_time_s")
            r.wall_time_s = parse_number_field(v);
        else
            r.extra[k] = v;
    }
    if (!kv.count("fidelity")) throw ValidationError("result: missing fidelity");
    return r;
}

std::string write_text_file(const std::string& dir, const std::string& name, const std::string& text) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ValidationError("cannot create output directory " + dir + ": " + ec.message());
    const fs::path p = fs::path(dir) / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw ValidationError("cannot write " + p.string());
    f << text;
    if (!f) throw ValidationError("write failed: " + p.string());
    return p.string();
}

}  // namespace fockprog
