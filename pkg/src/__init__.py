# LaceForge: quasiperiodic bobbin lace grounds
