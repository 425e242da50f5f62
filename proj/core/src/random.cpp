#include "tpg/random.hpp"

#include <sstream>

#include "tpg/error.hpp"

namespace tpg {

std::string Rng::state() const
{
    std::ostringstream os;
    os << engine_;
    return os.str();
}

void Rng::set_state(const std::string& s)
{
    std::istringstream is(s);
    is >> engine_;
    if (!is) {
        throw DataError("corrupt random stream state");
    }
}

} // namespace tpg
