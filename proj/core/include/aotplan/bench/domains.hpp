#pragma once

#include "aotplan/bench/domain.hpp"
#include "aotplan/domains/ctp.hpp"
#include "aotplan/domains/racetrack.hpp"
#include "aotplan/domains/sailing.hpp"
#include "aotplan/tabular_mdp.hpp"

#include <optional>
#include <string>
#include <variant>

namespace aotplan::bench {

struct DomainOptions {
    std::optional<int> horizon;
    std::optional<double> dead_end_penalty;
    /// CTP: evaluate on weathers where the target is reachable.
    bool solvable_only = true;
};

Domain<TabularMdp> make_tabular_domain(TabularMdp model, std::string name, const DomainOptions& opts = {});
/// H defaults to the node count. Episodes start at the source after sensing.
Domain<ctp::Model> make_ctp_domain(const ctp::Instance& inst, std::string name, const DomainOptions& opts = {});
/// H defaults to 50.
Domain<sailing::Model> make_sailing_domain(const sailing::Instance& inst, std::string name,
                                           const DomainOptions& opts = {});
/// H defaults to 50.
Domain<racetrack::Model> make_racetrack_domain(const racetrack::Instance& inst, std::string name,
                                               const DomainOptions& opts = {});

using AnyDomain = std::variant<Domain<TabularMdp>, Domain<ctp::Model>, Domain<sailing::Model>,
                               Domain<racetrack::Model>>;

/// Picks the format from the first directive (`mdp`, `ctp`, `sailing`,
/// `racetrack`). The instance name is the file's base name.
AnyDomain load_domain(const std::string& path, const DomainOptions& opts = {});

}  // namespace aotplan::bench
