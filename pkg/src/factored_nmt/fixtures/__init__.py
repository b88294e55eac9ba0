"""Paths to the packaged fixture data files."""

from importlib import resources


def fixture_path(name):
    return str(resources.files(__package__) / name)


def lexicon_path():
    return fixture_path("lexicon.tsv")


def toy_corpus_paths():
    return fixture_path("toy.en"), fixture_path("toy.fr")


def dictionary_path():
    return fixture_path("dict.en-fr.tsv")
