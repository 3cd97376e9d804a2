#pragma once

// Hartree atomic units throughout. Conversions live only at the API boundary.

#include <cmath>
#include <string>

#include "dcscat/error.hpp"

namespace dcscat {
namespace units {

// 100 kV/cm == 1.94401e-5 a.u. The CODATA chain (E_h/(e a0) = 5.14220674763e9 V/cm)
// gives 1.94469e-5 a.u., about 0.035% higher; the printed value is kept so
// that published field axes map one-to-one.
inline constexpr double kFieldAuPer100KvCm = 1.94401e-5;
inline constexpr double kFieldAuPerKvCm = kFieldAuPer100KvCm / 100.0;

// Boltzmann constant in Hartree per kelvin.
inline constexpr double kBoltzmannAu = 3.16681e-6;

// Static dipole polarizability used when none is given (sodium-like).
inline constexpr double kDefaultPolarizability = 162.7;

}  // namespace units

struct FieldConfig {
    double field_strength = 0.0;  // a.u.
    double alpha_a = units::kDefaultPolarizability;
    double alpha_b = units::kDefaultPolarizability;

    void validate() const
    {
        if (!(field_strength >= 0.0) || !std::isfinite(field_strength))
            throw InvalidArgument("field strength must be finite and non-negative");
        if (!(alpha_a > 0.0) || !(alpha_b > 0.0) || !std::isfinite(alpha_a) || !std::isfinite(alpha_b))
            throw InvalidArgument("polarizabilities must be finite and positive");
    }
};

inline double field_to_au(double field_kvcm)
{
    if (!(field_kvcm >= 0.0) || !std::isfinite(field_kvcm))
        throw InvalidArgument("field must be finite and non-negative, got " + std::to_string(field_kvcm) + " kV/cm");
    return field_kvcm * units::kFieldAuPerKvCm;
}

inline double field_to_kvcm(double field_au) { return field_au / units::kFieldAuPerKvCm; }

// C_E = 2 E^2 alpha_A alpha_B, the strength of the -C_E P2(cos theta) / R^3 term.
inline double coupling_coefficient(const FieldConfig& cfg)
{
    cfg.validate();
    return 2.0 * cfg.field_strength * cfg.field_strength * cfg.alpha_a * cfg.alpha_b;
}

inline double wavenumber(double collision_energy, double reduced_mass)
{
    if (!(collision_energy > 0.0))
        throw InvalidArgument("collision energy must be positive");
    if (!(reduced_mass > 0.0))
        throw InvalidArgument("reduced mass must be positive");
    return std::sqrt(2.0 * reduced_mass * collision_energy);
}

inline double temperature_to_energy(double kelvin)
{
    if (!(kelvin > 0.0))
        throw InvalidArgument("temperature must be positive");
    return units::kBoltzmannAu * kelvin;
}

}  // namespace dcscat
