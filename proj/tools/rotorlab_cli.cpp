// Placeholder main; subcommands land once the library is in place.
int main() { return 0; }
