"""Grammar -> Simper -> extended Turing machine -> class table, with executable checks at every layer."""
