#ifndef SELFORG_ZPM_HPP
#define SELFORG_ZPM_HPP

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "selforg/params.hpp"

namespace selforg {

inline constexpr double hbar_si = 1.054571817e-34; // J s

struct Species {
    std::string name;
    double lambda0_nm = 0.0;          // transition wavelength
    double gamma0_over_2pi_mhz = 0.0; // natural linewidth / 2pi
    double mass_kg = 0.0;

    double gamma0_si() const { return 2.0 * std::numbers::pi * gamma0_over_2pi_mhz * 1e6; }
    double lambda0_m() const { return lambda0_nm * 1e-9; }

    void validate() const {
        if (name.empty()) throw ConfigError("species needs a name");
        if (!(lambda0_nm > 0.0)) throw ConfigError("species wavelength must be positive: " + name);
        if (!(gamma0_over_2pi_mhz > 0.0)) throw ConfigError("species linewidth must be positive: " + name);
        if (!(mass_kg > 0.0)) throw ConfigError("species mass must be positive: " + name);
    }
};

// Dimensionless figure of merit hbar / (2 m a^2 Gamma0): the zero-point
// momentum spread of the trapped atom expressed against the friction scale.
// Self-organization survives quantum position uncertainty when the trap
// frequency (in Gamma0) stays above this bound.
inline double zpm_threshold(const Species& s, double spacing_lambda0) {
    s.validate();
    if (!(spacing_lambda0 > 0.0)) throw ConfigError("spacing must be positive");
    const double a = spacing_lambda0 * s.lambda0_m();
    return hbar_si / (2.0 * s.mass_kg * a * a * s.gamma0_si());
}

inline std::vector<Species> builtin_species() {
    return {
        {"Rb87_D2", 780.0, 6.07, 1.44e-25},
        {"Sr88_dipole", 461.0, 32.0, 1.46e-25},
        {"Sr88_narrow", 689.0, 7.5e-3, 1.46e-25},
        {"Yb174_dipole", 399.0, 29.0, 2.89e-25},
        {"Yb174_narrow", 556.0, 0.182, 2.89e-25},
    };
}

// CSV columns: name,lambda0_nm,gamma0_over_2pi_MHz,mass_kg. '#' comments and
// an optional header row are allowed.
inline std::vector<Species> load_species_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open species file: " + path);
    std::vector<Species> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream row(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(row, field, ',')) {
            const auto b = field.find_first_not_of(" \t\r");
            const auto e = field.find_last_not_of(" \t\r");
            fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
        }
        if (fields.size() == 4 && fields[0] == "name") continue; // header
        if (fields.size() != 4)
            throw ConfigError("species file line " + std::to_string(lineno) + ": expected 4 fields");
        Species s;
        s.name = fields[0];
        try {
            s.lambda0_nm = std::stod(fields[1]);
            s.gamma0_over_2pi_mhz = std::stod(fields[2]);
            s.mass_kg = std::stod(fields[3]);
        } catch (const std::exception&) {
            throw ConfigError("species file line " + std::to_string(lineno) + ": bad number");
        }
        s.validate();
        out.push_back(std::move(s));
    }
    if (out.empty()) throw ConfigError("species file has no entries: " + path);
    return out;
}

struct ZpmTable {
    std::vector<Species> species;
    std::vector<double> spacings; // lambda0
    Eigen::MatrixXd values;       // species x spacings
};

inline ZpmTable zpm_table(std::vector<Species> species,
                          std::vector<double> spacings = {1.5, 1.0, 0.5}) {
    if (species.empty() || spacings.empty()) throw ConfigError("zpm table needs species and spacings");
    ZpmTable t;
    t.values.resize(static_cast<Eigen::Index>(species.size()),
                    static_cast<Eigen::Index>(spacings.size()));
    for (std::size_t i = 0; i < species.size(); ++i)
        for (std::size_t j = 0; j < spacings.size(); ++j)
            t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                zpm_threshold(species[i], spacings[j]);
    t.species = std::move(species);
    t.spacings = std::move(spacings);
    return t;
}

} // namespace selforg

#endif
