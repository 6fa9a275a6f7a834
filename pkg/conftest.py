# configures pytest to allow CLI arguments.
import os

PARAMS_DEFAULT = os.path.join(os.path.dirname(__file__), 'schreierlab', 'test',
                              'desk.yaml')


def pytest_addoption(parser):
    parser.addoption("--seed", action="store", default="7")
    parser.addoption("--params", action="store", default=PARAMS_DEFAULT)


def pytest_generate_tests(metafunc):
    # This is called for every test. Only get/set command line arguments
    # if the argument is specified in the list of test "fixturenames".
    seed = metafunc.config.option.seed
    if 'seed' in metafunc.fixturenames and seed is not None:
        metafunc.parametrize("seed", [int(seed)])
    params = metafunc.config.option.params
    if 'params_path' in metafunc.fixturenames and params is not None:
        metafunc.parametrize("params_path", [params])
