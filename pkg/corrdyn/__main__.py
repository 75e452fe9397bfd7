from corrdyn.cli import main

main()
