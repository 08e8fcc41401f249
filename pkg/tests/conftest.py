import pytest

from unlearn_eval.datagen import GenSpec, generate
from unlearn_eval.langid import DetectorConfig
from unlearn_eval.languages import LANGUAGE_SET_1, LANGUAGE_SET_2


@pytest.fixture(scope="session")
def dataset():
    return generate(GenSpec())


@pytest.fixture(scope="session")
def profiles(dataset):
    return dataset[0]


@pytest.fixture(scope="session")
def pairs(dataset):
    return dataset[1]


@pytest.fixture(scope="session")
def detector():
    return DetectorConfig.for_languages(LANGUAGE_SET_1)


@pytest.fixture(scope="session")
def dataset2():
    return generate(GenSpec(languages=LANGUAGE_SET_2))
