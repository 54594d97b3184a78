#include "growl/error.hpp"
