#include "ehaloha/parallel.hpp"

#include <cstdlib>
#include <string>

namespace ehaloha {

unsigned default_parallelism()
{
    if (char const* env = std::getenv("EHALOHA_THREADS"))
    {
        try
        {
            long const n = std::stol(env);
            if (n > 0)
            {
                return static_cast<unsigned>(n);
            }
        }
        catch (std::exception const&)
        {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace ehaloha
